#include "ermab/cli/results_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ermab/errors.hpp"

namespace ermab::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void mean_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
}

// Column lookup by name so readers tolerate reordered columns.
class Columns {
 public:
  Columns(const CsvTable& t, std::initializer_list<const char*> required) : t_(t) {
    for (const char* name : required) {
      auto it = std::find(t.header.begin(), t.header.end(), name);
      if (it == t.header.end())
        throw Error(ErrorKind::ParseError, std::string("missing column '") + name + "'");
      index_[name] = static_cast<std::size_t>(it - t.header.begin());
    }
  }
  const std::string& str(std::size_t row, const char* name) const {
    return t_.rows[row][index_.at(name)];
  }
  double num(std::size_t row, const char* name) const {
    return parse_double(str(row, name), row + 1, name);
  }
  long long integer(std::size_t row, const char* name) const {
    const std::string& cell = str(row, name);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row + 1) + ", column " + name +
                                             ": '" + cell + "' is not an integer");
    return v;
  }
  std::uint64_t unsigned_integer(std::size_t row, const char* name) const {
    const std::string& cell = str(row, name);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row + 1) + ", column " + name +
                                             ": '" + cell + "' is not an unsigned integer");
    return v;
  }

 private:
  const CsvTable& t_;
  std::map<std::string, std::size_t> index_;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::ParseError, "bad hash '" + s + "'");
  return v;
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ", column " + column +
                                           ": '" + cell + "' is not a number");
  return v;
}

// --- records -----------------------------------------------------------------

std::vector<RecordRow> record_rows(const std::vector<SimulationRecord>& records) {
  std::vector<RecordRow> rows;
  for (const auto& r : records)
    for (std::size_t g = 0; g < r.per_group_total_reward.size(); ++g)
      rows.push_back({r.seed, std::string(to_string(r.policy)), g, r.per_group_size[g],
                      r.per_group_total_reward[g]});
  return rows;
}

CsvTable to_table(const std::vector<RecordRow>& rows) {
  CsvTable t{{"seed", "policy", "group", "group_size", "group_total_reward"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.seed), r.policy, std::to_string(r.group),
                      std::to_string(r.group_size), format_double(r.group_total_reward)});
  return t;
}

std::vector<RecordRow> record_rows_from(const CsvTable& t) {
  Columns c(t, {"seed", "policy", "group", "group_size", "group_total_reward"});
  std::vector<RecordRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    rows.push_back({c.unsigned_integer(i, "seed"), c.str(i, "policy"),
                    static_cast<std::size_t>(c.unsigned_integer(i, "group")),
                    static_cast<int>(c.integer(i, "group_size")), c.num(i, "group_total_reward")});
  return rows;
}

// --- pareto ------------------------------------------------------------------

std::vector<ParetoRecordRow> pareto_record_rows(double alpha,
                                                const std::vector<SimulationRecord>& records) {
  std::vector<ParetoRecordRow> rows;
  for (const auto& r : records) {
    if (r.per_group_engagement_reward.empty())
      throw Error(ErrorKind::DomainLacksClinicalFlag, "record has no engagement/clinical split");
    for (std::size_t g = 0; g < r.per_group_total_reward.size(); ++g)
      rows.push_back({alpha,
                      {r.seed, std::string(to_string(r.policy)), g, r.per_group_size[g],
                       r.per_group_total_reward[g]},
                      r.per_group_engagement_reward[g],
                      r.per_group_clinical_reward[g]});
  }
  return rows;
}

CsvTable to_table(const std::vector<ParetoRecordRow>& rows) {
  CsvTable t{{"alpha", "seed", "policy", "group", "group_size", "group_total_reward",
              "group_engagement_reward", "group_clinical_reward"},
             {}};
  for (const auto& r : rows)
    t.rows.push_back({format_double(r.alpha), std::to_string(r.record.seed), r.record.policy,
                      std::to_string(r.record.group), std::to_string(r.record.group_size),
                      format_double(r.record.group_total_reward),
                      format_double(r.group_engagement_reward),
                      format_double(r.group_clinical_reward)});
  return t;
}

std::vector<ParetoRecordRow> pareto_record_rows_from(const CsvTable& t) {
  const auto base = record_rows_from(t);
  Columns c(t, {"alpha", "group_engagement_reward", "group_clinical_reward"});
  std::vector<ParetoRecordRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    rows.push_back({c.num(i, "alpha"), base[i], c.num(i, "group_engagement_reward"),
                    c.num(i, "group_clinical_reward")});
  return rows;
}

CsvTable to_table(const std::vector<ParetoRow>& rows) {
  CsvTable t{{"alpha", "policy", "seeds", "engagement_mean", "engagement_stderr", "clinical_mean",
              "clinical_stderr", "reward_mean", "reward_stderr"},
             {}};
  for (const auto& r : rows)
    t.rows.push_back({format_double(r.alpha), r.policy, std::to_string(r.seeds),
                      format_double(r.engagement_mean), format_double(r.engagement_stderr),
                      format_double(r.clinical_mean), format_double(r.clinical_stderr),
                      format_double(r.reward_mean), format_double(r.reward_stderr)});
  return t;
}

std::vector<ParetoRow> pareto_rows_from(const CsvTable& t) {
  Columns c(t, {"alpha", "policy", "seeds", "engagement_mean", "engagement_stderr",
                "clinical_mean", "clinical_stderr", "reward_mean", "reward_stderr"});
  std::vector<ParetoRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    rows.push_back({c.num(i, "alpha"), c.str(i, "policy"), static_cast<int>(c.integer(i, "seeds")),
                    c.num(i, "engagement_mean"), c.num(i, "engagement_stderr"),
                    c.num(i, "clinical_mean"), c.num(i, "clinical_stderr"),
                    c.num(i, "reward_mean"), c.num(i, "reward_stderr")});
  return rows;
}

// --- capacity ----------------------------------------------------------------

CsvTable to_table(const std::vector<CapacityRow>& rows) {
  CsvTable t{{"policy", "budget", "level_mean", "level_stderr"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({r.policy, std::to_string(r.budget), format_double(r.level_mean),
                      format_double(r.level_stderr)});
  return t;
}

std::vector<CapacityRow> capacity_rows_from(const CsvTable& t) {
  Columns c(t, {"policy", "budget", "level_mean", "level_stderr"});
  std::vector<CapacityRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    rows.push_back({c.str(i, "policy"), static_cast<int>(c.integer(i, "budget")),
                    c.num(i, "level_mean"), c.num(i, "level_stderr")});
  return rows;
}

// --- summaries ---------------------------------------------------------------

PolicySummary summarize(const std::vector<SimulationRecord>& records) {
  const Summary s = aggregate(records);
  PolicySummary out;
  out.policy = std::string(to_string(s.policy));
  out.n_records = s.n_records;
  out.reward_mean = s.mean_reward_per_arm;
  out.reward_stderr = s.stderr_reward_per_arm;
  out.gini_mean = s.mean_gini;
  out.gini_stderr = s.stderr_gini;
  out.per_group_average = s.per_group_average;
  out.per_group_mean_budget = s.per_group_mean_budget;
  std::vector<double> gaps;
  for (const auto& r : records) gaps.push_back(r.conjecture_gap);
  double unused = 0.0;
  mean_stderr(gaps, out.conjecture_gap, unused);
  return out;
}

Json to_json(const PolicySummary& s) {
  Json j = Json::object();
  j["policy"] = s.policy;
  j["n_records"] = s.n_records;
  j["reward_per_arm"] = {{"mean", s.reward_mean}, {"stderr", s.reward_stderr}};
  j["gini"] = {{"mean", s.gini_mean}, {"stderr", s.gini_stderr}};
  j["per_group_average"] = s.per_group_average;
  j["per_group_mean_budget"] = s.per_group_mean_budget;
  j["conjecture_gap"] = s.conjecture_gap;
  return j;
}

PolicySummary policy_summary_from(const Json& j) {
  PolicySummary s;
  s.policy = field<std::string>(j, "policy");
  s.n_records = field<std::size_t>(j, "n_records");
  const Json reward = field<Json>(j, "reward_per_arm");
  s.reward_mean = field<double>(reward, "mean");
  s.reward_stderr = field<double>(reward, "stderr");
  const Json gini = field<Json>(j, "gini");
  s.gini_mean = field<double>(gini, "mean");
  s.gini_stderr = field<double>(gini, "stderr");
  s.per_group_average = field<std::vector<double>>(j, "per_group_average");
  s.per_group_mean_budget = field<std::vector<double>>(j, "per_group_mean_budget");
  s.conjecture_gap = field<double>(j, "conjecture_gap");
  return s;
}

Json to_json(const RunSummary& s) {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  Json list = Json::array();
  for (const auto& p : s.policies) list.push_back(to_json(p));
  j["policies"] = list;
  return j;
}

RunSummary run_summary_from(const Json& j) {
  check_schema(j);
  RunSummary s;
  for (const auto& p : field<Json>(j, "policies")) s.policies.push_back(policy_summary_from(p));
  return s;
}

Json to_json(const CapacitySummary& s) {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  j["metric"] = kCapacityMetric;
  j["target"] = s.target;
  Json curves = Json::array();
  for (const auto& c : s.curves) {
    Json pts = Json::array();
    for (const auto& p : c.points)
      pts.push_back({{"budget", p.budget}, {"level", p.level_mean}, {"stderr", p.level_stderr}});
    Json cj = Json::object();
    cj["policy"] = c.policy;
    cj["curve"] = pts;
    cj["crossing_budget"] = c.crossing_budget ? Json(*c.crossing_budget) : Json("not reached");
    curves.push_back(cj);
  }
  j["policies"] = curves;
  return j;
}

CapacitySummary capacity_summary_from(const Json& j) {
  check_schema(j);
  CapacitySummary s;
  s.target = field<double>(j, "target");
  for (const auto& cj : field<Json>(j, "policies")) {
    CapacityCurve c;
    c.policy = field<std::string>(cj, "policy");
    for (const auto& p : field<Json>(cj, "curve"))
      c.points.push_back({c.policy, field<int>(p, "budget"), field<double>(p, "level"),
                          field<double>(p, "stderr")});
    const Json& cross = field<Json>(cj, "crossing_budget");
    if (cross.is_number_integer()) c.crossing_budget = cross.get<int>();
    s.curves.push_back(std::move(c));
  }
  return s;
}

// --- manifest ----------------------------------------------------------------

Json to_json(const Manifest& m) {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "ermab";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = to_json(m.config);
  j["realloc"] = m.config.realloc_every_round ? "every-round" : "once";
  j["charge_rule"] = m.config.charge_rule == ChargeRule::Envelope ? "envelope" : "midpoint";
  j["rng"] = {
      {"scheme", "splitmix64 sub-streams derived from (episode seed, purpose, arm, round)"},
      {"episode_seed", "base_seed + k for k = 0..seeds-1"},
      {"transitions", "counter-based uniform per (episode seed, arm, round), inverse-CDF sampling"},
      {"policy", "mt19937_64 seeded from (episode seed, policy purpose)"},
      {"upsample", "mt19937_64 seeded from (episode seed, upsample purpose); redrawn on every "
                   "allocation call"},
      {"domain_build", "maternal noise: normal draws from (episode seed, domain purpose)"}};
  j["capacity_metric"] = kCapacityMetric;
  Json inst = Json::array();
  for (const auto& e : m.instances)
    inst.push_back({{"seed", e.seed}, {"budget", e.budget}, {"alpha", e.alpha}, {"hash", hex(e.hash)}});
  j["instances"] = inst;
  Json files = Json::object();
  for (const auto& [role, name] : m.files) files[role] = name;
  j["files"] = files;
  return j;
}

Manifest manifest_from(const Json& j) {
  check_schema(j);
  Manifest m;
  m.command = field<std::string>(j, "command");
  m.config = parse_config(field<Json>(j, "config"));
  for (const auto& e : field<Json>(j, "instances"))
    m.instances.push_back({field<std::uint64_t>(e, "seed"), field<int>(e, "budget"),
                           field<double>(e, "alpha"), from_hex(field<std::string>(e, "hash"))});
  const Json files = field<Json>(j, "files");
  for (const auto& [role, name] : files.items()) m.files[role] = name.get<std::string>();
  return m;
}

void check_schema(const Json& j) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw Error(ErrorKind::ParseError, "document has no schema_version");
  const Json& v = j.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw Error(ErrorKind::ParseError,
                "unsupported schema_version " + v.dump() + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move " + tmp.string() + " to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ermab::cli
