#pragma once

#include <cstdint>

#include "ermab/arm_model.hpp"

namespace ermab {

inline constexpr double kDefaultJointWorkBound = 1e8;

/// Estimated elementary updates for exact_joint_value: |S|^N * H * (number of
/// action subsets of size <= b). The joint state count uses the largest arm.
double joint_work_estimate(const GroupedInstance& instance, int budget);

/// Exact optimal value V^0(s^0, b) of the coupled problem by dynamic
/// programming over the joint state space and every subset of at most b arms
/// per round. Desk-scale only: throws Error(InstanceTooLarge) when the work
/// estimate exceeds `work_bound`.
double exact_joint_value(const GroupedInstance& instance, int budget,
                         double work_bound = kDefaultJointWorkBound);

}  // namespace ermab
