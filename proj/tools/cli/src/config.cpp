#include "ermab/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ermab/errors.hpp"
#include "ermab/rng.hpp"

namespace ermab::cli {

namespace {

const std::vector<DomainInfo> kCatalog = {
    {Domain::Synthetic, "synthetic",
     "five groups of two-state arms; C is small, D and E ignore interventions", 100, 20, 20},
    {Domain::Maternal, "maternal",
     "three-state adherence arms in three groups, per-arm noisy probabilities", 200, 60, 20},
    {Domain::Diabetes, "diabetes",
     "54-state engagement x clinical x memory arms in six demographic groups", 300, 75, 20},
};

std::size_t state_count(Domain d) {
  switch (d) {
    case Domain::Synthetic: return 2;
    case Domain::Maternal: return 3;
    case Domain::Diabetes: return kDiabetesStates;
  }
  return 0;
}

const DomainInfo& info_for(Domain d) {
  for (const auto& i : kCatalog)
    if (i.domain == d) return i;
  return kCatalog.front();
}

// Reads typed fields out of a JSON object, recording problems by field path
// instead of throwing on the first one.
class Reader {
 public:
  Reader(const Json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) error("", "expected an object");
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::size_t> ||
                    std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer()) return error(key, "expected an integer");
        if constexpr (!std::is_same_v<T, int>)
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
            return error(key, "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) return error(key, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) return error(key, "expected a string");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      error(key, e.what());
    }
  }

  template <class T>
  void get_list(const char* key, std::vector<T>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const Json& v = obj_.at(key);
    if (!v.is_array()) return error(key, "expected a list");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string at = std::string(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, int>) {
        if (!v[i].is_number_integer()) {
          error(at, "expected an integer");
          continue;
        }
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v[i].is_number()) {
          error(at, "expected a number");
          continue;
        }
      } else {
        if (!v[i].is_string()) {
          error(at, "expected a string");
          continue;
        }
      }
      out.push_back(v[i].get<T>());
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  Reader child(const char* key) {
    seen_.insert(key);
    return Reader(obj_.at(key), field(key), errors_);
  }

  void reject_unknown() {
    if (!obj_.is_object()) return;
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key)) error(key, "unknown field");
  }

  std::string field(const std::string& key) const {
    return key.empty() ? path_ : path_ + "." + key;
  }

  void error(const std::string& key, const std::string& what) {
    errors_.push_back(field(key) + ": " + what);
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

DiabetesGroupTable parse_inline_table(const Json& rows, const std::string& path,
                                      std::vector<std::string>& errors) {
  DiabetesGroupTable table;
  if (!rows.is_array()) {
    errors.push_back(path + ": expected a file path or a list of rows");
    return table;
  }
  const auto& cols = group_table_columns();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Reader row(rows[r], path + "[" + std::to_string(r) + "]", errors);
    DiabetesGroupParams p;
    double* numeric[] = {&p.p_act_m_to_e,       &p.p_act_m_to_d,         &p.p_act_e_to_e,
                         &p.p_pass_m_to_d,      &p.p_low_unengaged_high, &p.p_low_unengaged_low,
                         &p.p_low_engaged_high, &p.p_low_engaged_low,    &p.frac};
    for (std::size_t c = 0; c < 9; ++c) {
      if (!row.has(cols[c].c_str())) row.error(cols[c], "missing");
      row.get(cols[c].c_str(), *numeric[c]);
    }
    row.get("sex", p.sex);
    row.get("age", p.age);
    row.reject_unknown();
    table.push_back(std::move(p));
  }
  return table;
}

Json table_to_json(const DiabetesGroupTable& table) {
  const auto& cols = group_table_columns();
  Json rows = Json::array();
  for (const auto& p : table) {
    const double numeric[] = {p.p_act_m_to_e,       p.p_act_m_to_d,         p.p_act_e_to_e,
                              p.p_pass_m_to_d,      p.p_low_unengaged_high, p.p_low_unengaged_low,
                              p.p_low_engaged_high, p.p_low_engaged_low,    p.frac};
    Json row = Json::object();
    for (std::size_t c = 0; c < 9; ++c) row[cols[c]] = numeric[c];
    row["sex"] = p.sex;
    row["age"] = p.age;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string_view to_string(Domain d) { return info_for(d).name; }

std::optional<Domain> parse_domain(std::string_view name) {
  const std::string needle = lower(std::string(name));
  for (const auto& i : kCatalog)
    if (i.name == needle) return i.domain;
  return std::nullopt;
}

const std::vector<DomainInfo>& domain_catalog() { return kCatalog; }

ExperimentConfig parse_config(const Json& input, const std::filesystem::path& base_dir) {
  const Json& doc = input.is_object() && input.contains("config") && input.contains("schema_version")
                        ? input.at("config")
                        : input;
  std::vector<std::string> errors;
  Reader top(doc, "config", errors);
  ExperimentConfig cfg;

  std::string domain_name;
  top.get("domain", domain_name);
  if (!top.has("domain")) {
    top.error("domain", "missing");
  } else if (auto d = parse_domain(domain_name)) {
    cfg.domain = *d;
  } else if (!domain_name.empty()) {
    top.error("domain", "unknown domain '" + domain_name + "'");
  }
  const DomainInfo& info = info_for(cfg.domain);
  cfg.n_arms = info.default_arms;
  cfg.budget = info.default_budget;
  cfg.horizon = info.default_horizon;

  top.get("n_arms", cfg.n_arms);
  top.get("budget", cfg.budget);
  top.get("horizon", cfg.horizon);
  top.get("seeds", cfg.seeds);
  top.get("base_seed", cfg.base_seed);
  top.get("precision", cfg.precision);
  top.get("output_dir", cfg.output_dir);
  if (top.has("start_state")) {
    std::size_t s = 0;
    top.get("start_state", s);
    cfg.start_state = s;
  } else {
    top.mark("start_state");
  }

  std::vector<std::string> names;
  top.get_list("policies", names);
  if (!top.has("policies")) {
    for (PolicyKind k : all_policy_kinds())
      if (cfg.domain == Domain::Diabetes || !needs_clinical_flag(k)) cfg.policies.push_back(k);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (auto k = parse_policy_kind(names[i]))
      cfg.policies.push_back(*k);
    else
      top.error("policies[" + std::to_string(i) + "]", "unknown policy '" + names[i] + "'");
  }

  std::string realloc = "every-round";
  top.get("realloc", realloc);
  if (realloc == "every-round")
    cfg.realloc_every_round = true;
  else if (realloc == "once")
    cfg.realloc_every_round = false;
  else
    top.error("realloc", "expected 'every-round' or 'once', got '" + realloc + "'");

  std::string rule = "envelope";
  top.get("charge_rule", rule);
  if (rule == "envelope")
    cfg.charge_rule = ChargeRule::Envelope;
  else if (rule == "midpoint")
    cfg.charge_rule = ChargeRule::Midpoint;
  else
    top.error("charge_rule", "expected 'envelope' or 'midpoint', got '" + rule + "'");

  auto domain_block = [&](const char* key, Domain owner, auto&& body) {
    if (!top.has(key)) {
      top.mark(key);
      return;
    }
    Reader r = top.child(key);
    if (cfg.domain != owner) r.error("", "only valid for domain " + std::string(to_string(owner)));
    body(r);
    r.reject_unknown();
  };
  domain_block("synthetic", Domain::Synthetic, [&](Reader& r) { r.get_list("group_fracs", cfg.group_fracs); });
  domain_block("maternal", Domain::Maternal, [&](Reader& r) {
    r.get("large_group", cfg.large_group);
    r.get("noise_scale", cfg.noise_scale);
  });
  bool table_given = false;
  domain_block("diabetes", Domain::Diabetes, [&](Reader& r) {
    r.get("alpha", cfg.alpha);
    r.get_list("alphas", cfg.alphas);
    r.mark("group_table");
    if (!r.has("group_table")) return;
    table_given = true;
    const Json& t = doc.at("diabetes").at("group_table");
    if (t.is_string()) {
      std::filesystem::path p = t.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      try {
        cfg.group_table = load_group_table(p);
      } catch (const Error& e) {
        r.error("group_table", e.what());
      }
    } else {
      cfg.group_table = parse_inline_table(t, r.field("group_table"), errors);
    }
  });
  if (cfg.domain == Domain::Diabetes && !table_given)
    cfg.group_table = DiabetesSpec::default_diabetes_table();

  if (top.has("capacity")) {
    Reader r = top.child("capacity");
    CapacitySweep sweep;
    r.get_list("budgets", sweep.budgets);
    r.get("target", sweep.target);
    if (!r.has("budgets")) r.error("budgets", "missing");
    if (!r.has("target")) r.error("target", "missing");
    r.reject_unknown();
    cfg.capacity = std::move(sweep);
  } else {
    top.mark("capacity");
  }
  top.reject_unknown();

  for (auto& e : validation_errors(cfg))
    if (std::find(errors.begin(), errors.end(), e) == errors.end()) errors.push_back(std::move(e));
  if (!errors.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < errors.size(); ++i) msg << (i ? "\n" : "") << errors[i];
    throw Error(ErrorKind::ConfigError, msg.str());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::vector<std::string> validation_errors(const ExperimentConfig& c) {
  std::vector<std::string> errs;
  auto bad = [&](const std::string& field, const std::string& what) {
    errs.push_back("config." + field + ": " + what);
  };
  if (c.n_arms < 1) bad("n_arms", "must be at least 1");
  if (c.horizon < 1) bad("horizon", "must be at least 1");
  if (c.budget < 0 || c.budget > c.n_arms)
    bad("budget", "must lie in [0, n_arms] (got " + std::to_string(c.budget) + ")");
  if (c.seeds < 1) bad("seeds", "must be at least 1");
  if (!(c.precision > 0.0)) bad("precision", "must be positive");
  if (c.policies.empty()) bad("policies", "no policies selected");
  for (std::size_t i = 0; i < c.policies.size(); ++i)
    if (needs_clinical_flag(c.policies[i]) && c.domain != Domain::Diabetes)
      bad("policies[" + std::to_string(i) + "]",
          std::string(ermab::to_string(c.policies[i])) + " needs the diabetes domain");
  if (c.start_state && *c.start_state >= state_count(c.domain))
    bad("start_state", "must be below " + std::to_string(state_count(c.domain)));

  switch (c.domain) {
    case Domain::Synthetic:
      if (!c.group_fracs.empty() && c.group_fracs.size() != 5)
        bad("synthetic.group_fracs", "expected 5 fractions");
      break;
    case Domain::Maternal:
      if (c.large_group > 2) bad("maternal.large_group", "must be 0, 1 or 2");
      if (c.noise_scale < 0.0) bad("maternal.noise_scale", "must be non-negative");
      break;
    case Domain::Diabetes:
      if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) bad("diabetes.alpha", "must lie in [0, 1]");
      for (std::size_t i = 0; i < c.alphas.size(); ++i)
        if (!(c.alphas[i] >= 0.0 && c.alphas[i] <= 1.0))
          bad("diabetes.alphas[" + std::to_string(i) + "]", "must lie in [0, 1]");
      if (c.group_table.size() != 6) bad("diabetes.group_table", "expected 6 rows");
      try {
        validate_group_table(c.group_table);
      } catch (const Error& e) {
        bad("diabetes.group_table", e.what());
      }
      break;
  }

  if (c.capacity) {
    const auto& b = c.capacity->budgets;
    if (b.empty()) bad("capacity.budgets", "must not be empty");
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] < 0 || b[i] > c.n_arms)
        bad("capacity.budgets[" + std::to_string(i) + "]", "must lie in [0, n_arms]");
      if (i > 0 && b[i] <= b[i - 1])
        bad("capacity.budgets[" + std::to_string(i) + "]", "budgets must be strictly ascending");
    }
  }

  if (errs.empty()) {
    // Catches group sizes that round to zero and similar build-time failures.
    try {
      build_instance(c, c.base_seed, c.budget, c.alpha);
    } catch (const Error& e) {
      bad("n_arms", e.what());
    }
  }
  return errs;
}

Json to_json(const ExperimentConfig& c) {
  Json j = Json::object();
  j["domain"] = to_string(c.domain);
  j["n_arms"] = c.n_arms;
  j["budget"] = c.budget;
  j["horizon"] = c.horizon;
  Json pol = Json::array();
  for (PolicyKind k : c.policies) pol.push_back(ermab::to_string(k));
  j["policies"] = pol;
  j["seeds"] = c.seeds;
  j["base_seed"] = c.base_seed;
  j["precision"] = c.precision;
  j["realloc"] = c.realloc_every_round ? "every-round" : "once";
  j["charge_rule"] = c.charge_rule == ChargeRule::Envelope ? "envelope" : "midpoint";
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  if (c.start_state) j["start_state"] = *c.start_state;
  switch (c.domain) {
    case Domain::Synthetic:
      if (!c.group_fracs.empty()) j["synthetic"] = {{"group_fracs", c.group_fracs}};
      break;
    case Domain::Maternal:
      j["maternal"] = {{"large_group", c.large_group}, {"noise_scale", c.noise_scale}};
      break;
    case Domain::Diabetes: {
      Json d = Json::object();
      d["alpha"] = c.alpha;
      if (!c.alphas.empty()) d["alphas"] = c.alphas;
      d["group_table"] = table_to_json(c.group_table);
      j["diabetes"] = d;
      break;
    }
  }
  if (c.capacity) j["capacity"] = {{"budgets", c.capacity->budgets}, {"target", c.capacity->target}};
  return j;
}

GroupedInstance build_instance(const ExperimentConfig& c, std::uint64_t seed, int budget,
                               double alpha) {
  switch (c.domain) {
    case Domain::Synthetic: {
      SyntheticSpec spec;
      spec.n_arms = c.n_arms;
      spec.budget = budget;
      spec.horizon = c.horizon;
      if (!c.group_fracs.empty()) std::copy(c.group_fracs.begin(), c.group_fracs.end(), spec.group_fracs.begin());
      if (c.start_state) spec.start_state = *c.start_state;
      return build_synthetic(spec);
    }
    case Domain::Maternal: {
      MaternalSpec spec;
      spec.n_arms = c.n_arms;
      spec.budget = budget;
      spec.horizon = c.horizon;
      spec.large_group = c.large_group;
      spec.noise_scale = c.noise_scale;
      if (c.start_state) spec.start_state = *c.start_state;
      return build_maternal(spec, seed);
    }
    case Domain::Diabetes: {
      DiabetesSpec spec;
      spec.alpha = alpha;
      spec.n_arms = c.n_arms;
      spec.budget = budget;
      spec.horizon = c.horizon;
      spec.group_table = c.group_table;
      if (c.start_state) spec.start_state = decode(*c.start_state);
      return build_diabetes(spec);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown domain");
}

bool instance_depends_on_seed(const ExperimentConfig& c) {
  return c.domain == Domain::Maternal && c.noise_scale > 0.0;
}

std::uint64_t instance_hash(const GroupedInstance& inst) {
  std::uint64_t h = mix64(inst.n_arms());
  for (std::size_t n = 0; n < inst.n_arms(); ++n) {
    h = mix64(h ^ inst.arms[n].fingerprint());
    h = mix64(h ^ inst.group_of[n]);
    h = mix64(h ^ inst.start_states[n]);
  }
  h = mix64(h ^ static_cast<std::uint64_t>(inst.horizon));
  return mix64(h ^ static_cast<std::uint64_t>(inst.total_budget));
}

PolicySpec policy_spec(const ExperimentConfig& c, PolicyKind kind) {
  PolicySpec p;
  p.kind = kind;
  p.realloc_every_round = c.realloc_every_round;
  p.precision = c.precision;
  p.charge_rule = c.charge_rule;
  return p;
}

}  // namespace ermab::cli
