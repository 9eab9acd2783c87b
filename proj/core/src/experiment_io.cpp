#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "grouse/errors.hpp"
#include "grouse/experiment.hpp"

namespace grouse {
namespace {

using Json = nlohmann::ordered_json;

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["sigma_sq"] = cfg.sigma_sq;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["max_iters"] = cfg.max_iters;
  j["eps_star"] = cfg.eps_star;
  j["mode"] = std::string(to_string(cfg.mode));
  j["sparse_ubar"] = cfg.sparse_ubar;
  j["c"] = cfg.c;
  j["record_every"] = cfg.record_every;
  j["threads"] = cfg.threads;
  j["out_path"] = cfg.out_path;
  j["rho"] = cfg.rho;
  j["rho_prime"] = cfg.rho_prime;
  j["tau1"] = cfg.tau1 ? Json(*cfg.tau1) : Json(nullptr);
  j["tau2"] = cfg.tau2 ? Json(*cfg.tau2) : Json(nullptr);
  j["reorth_period"] = cfg.reorth_period;
  j["stop_at_target"] = cfg.stop_at_target;
  j["init_at_truth"] = cfg.init_at_truth;
  return j;
}

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("config field '") + key + "': " + e.what());
  }
}

ExperimentConfig config_from_object(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "n") read_field(j, "n", cfg.n);
    else if (key == "d") read_field(j, "d", cfg.d);
    else if (key == "sigma_sq") read_field(j, "sigma_sq", cfg.sigma_sq);
    else if (key == "trials") read_field(j, "trials", cfg.trials);
    else if (key == "seed") read_field(j, "seed", cfg.seed);
    else if (key == "max_iters") read_field(j, "max_iters", cfg.max_iters);
    else if (key == "eps_star") read_field(j, "eps_star", cfg.eps_star);
    else if (key == "mode") {
      std::string mode;
      read_field(j, "mode", mode);
      cfg.mode = parse_step_mode(mode);
    }
    else if (key == "sparse_ubar") read_field(j, "sparse_ubar", cfg.sparse_ubar);
    else if (key == "c") read_field(j, "c", cfg.c);
    else if (key == "record_every") read_field(j, "record_every", cfg.record_every);
    else if (key == "threads") read_field(j, "threads", cfg.threads);
    else if (key == "out_path") read_field(j, "out_path", cfg.out_path);
    else if (key == "rho") read_field(j, "rho", cfg.rho);
    else if (key == "rho_prime") read_field(j, "rho_prime", cfg.rho_prime);
    else if (key == "tau1" || key == "tau2") {
      auto& slot = key == "tau1" ? cfg.tau1 : cfg.tau2;
      if (value.is_null()) slot.reset();
      else {
        double v = 0.0;
        read_field(j, key.c_str(), v);
        slot = v;
      }
    }
    else if (key == "reorth_period") read_field(j, "reorth_period", cfg.reorth_period);
    else if (key == "stop_at_target") read_field(j, "stop_at_target", cfg.stop_at_target);
    else if (key == "init_at_truth") read_field(j, "init_at_truth", cfg.init_at_truth);
    else throw InvalidArgument("unknown config field '" + key + "'");
  }
  return cfg;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string optional_int(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::string to_json(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(); }

ExperimentConfig config_from_json(const std::string& text) { return config_from_object(parse(text)); }

std::vector<ExperimentConfig> sweep_from_json(const std::string& text) {
  const Json root = parse(text);
  std::vector<ExperimentConfig> out;
  if (root.is_array()) {
    for (const auto& item : root) out.push_back(config_from_object(item));
  } else if (root.is_object() && root.contains("grid")) {
    const Json base = root.value("base", Json::object());
    const Json& grid = root.at("grid");
    if (!grid.is_object()) throw InvalidArgument("sweep 'grid' must be an object of arrays");
    std::vector<Json> expanded{base};
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty()) {
        throw InvalidArgument("sweep grid key '" + key + "' must map to a non-empty array");
      }
      std::vector<Json> next;
      for (const auto& partial : expanded) {
        for (const auto& v : values) {
          Json item = partial;
          item[key] = v;
          next.push_back(std::move(item));
        }
      }
      expanded = std::move(next);
    }
    for (const auto& item : expanded) out.push_back(config_from_object(item));
  } else if (root.is_object()) {
    out.push_back(config_from_object(root));
  } else {
    throw InvalidArgument("sweep file must be a config, an array of configs, or {base, grid}");
  }
  if (out.empty()) throw InvalidArgument("sweep file contains no configurations");
  return out;
}

std::vector<ExperimentConfig> load_sweep_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return sweep_from_json(buffer.str());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_metadata_header(std::ostream& out, const std::string& config_json) {
  out << "# grouse " << config_json << '\n' << "# generated " << utc_timestamp() << '\n';
}

void write_trajectory_csv(std::ostream& out, const ExperimentConfig& cfg, const Trajectory& trajectory) {
  write_metadata_header(out, to_json(cfg));
  out << "# trial_id " << trajectory.result.trial_id << " derived_seed " << trajectory.result.derived_seed << '\n';
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& s : trajectory.samples) {
    out << s.t << ',' << format_double(s.zeta) << ',' << format_double(s.epsilon) << ',' << format_double(s.theta)
        << ',' << format_double(s.alpha) << ',' << format_double(s.projection_norm_sq) << ','
        << format_double(s.residual_norm_sq) << ',' << (s.skipped ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing trajectory CSV");
}

void write_trials_csv(std::ostream& out, std::span<const ExperimentConfig> configs,
                      std::span<const std::vector<TrialResult>> trials) {
  Json all = Json::array();
  for (const auto& cfg : configs) all.push_back(config_to_json(cfg));
  write_metadata_header(out, all.dump());
  out << "config_index,trial_id,derived_seed,k1,k2,target_zeta,target_eps,final_zeta,final_eps,iters_run,"
         "skipped_steps,error\n";
  for (std::size_t c = 0; c < trials.size(); ++c) {
    for (const auto& t : trials[c]) {
      std::string error = t.error;
      for (char& ch : error) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << c << ',' << t.trial_id << ',' << t.derived_seed << ',' << optional_int(t.phase.k1) << ','
          << optional_int(t.phase.k2) << ',' << format_double(t.phase.target_zeta) << ','
          << format_double(t.phase.target_eps) << ',' << format_double(t.final_zeta) << ','
          << format_double(t.final_eps) << ',' << t.iters_run << ',' << t.skipped_steps << ',' << error << '\n';
    }
  }
  if (!out) throw IoError("failed writing trials CSV");
}

void write_sweep_summary_csv(std::ostream& out, std::span<const SweepRow> rows) {
  Json all = Json::array();
  for (const auto& row : rows) all.push_back(config_to_json(row.config));
  write_metadata_header(out, all.dump());
  out << "config_index,n,d,sigma_sq,mode,eps_star,trials,failed,k1_reached,k2_reached,k1_ratio_mean,k1_ratio_var,"
         "k2_ratio_mean,k2_ratio_var,k1_bound,k2_bound,within_total_bound,within_k2_bound\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << i << ',' << r.config.n << ',' << r.config.d << ',' << format_double(r.config.sigma_sq) << ','
        << to_string(r.config.mode) << ',' << format_double(r.config.eps_star) << ',' << r.trials << ','
        << r.failed << ',' << r.k1_reached << ',' << r.k2_reached << ',' << format_double(r.k1_ratio_mean) << ','
        << format_double(r.k1_ratio_var) << ',' << format_double(r.k2_ratio_mean) << ','
        << format_double(r.k2_ratio_var) << ',' << format_double(r.k1_bound) << ',' << format_double(r.k2_bound)
        << ',' << r.within_total_bound << ',' << r.within_k2_bound << '\n';
  }
  if (!out) throw IoError("failed writing sweep summary CSV");
}

std::string sweep_summary_json(std::span<const SweepRow> rows) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  Json doc;
  doc["generated"] = utc_timestamp();
  Json list = Json::array();
  for (const auto& r : rows) {
    Json item;
    item["config"] = config_to_json(r.config);
    item["trials"] = r.trials;
    item["failed"] = r.failed;
    item["k1_reached"] = r.k1_reached;
    item["k2_reached"] = r.k2_reached;
    item["k1_ratio_mean"] = num(r.k1_ratio_mean);
    item["k1_ratio_var"] = num(r.k1_ratio_var);
    item["k2_ratio_mean"] = num(r.k2_ratio_mean);
    item["k2_ratio_var"] = num(r.k2_ratio_var);
    item["k1_bound"] = num(r.k1_bound);
    item["k2_bound"] = num(r.k2_bound);
    item["within_total_bound"] = r.within_total_bound;
    item["within_k2_bound"] = r.within_k2_bound;
    list.push_back(std::move(item));
  }
  doc["rows"] = std::move(list);
  return doc.dump(2);
}

void write_bounds_csv(std::ostream& out, std::span<const BoundsRow> rows) {
  out << "n,d,rho,rho_prime,eps_star,C,mu0,k1,k1_from_rate,k2,k,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    const auto& p = r.params;
    out << p.n << ',' << p.d << ',' << format_double(p.rho) << ',' << format_double(p.rho_prime) << ','
        << format_double(p.eps_star) << ',' << format_double(p.C) << ',' << opt(r.mu0) << ',' << opt(r.k1) << ','
        << opt(r.k1_from_rate) << ',' << opt(r.k2) << ',' << opt(r.total) << ',' << r.error << '\n';
  }
  if (!out) throw IoError("failed writing bounds CSV");
}

std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    body += line;
    body += '\n';
  }
  return body;
}

}  // namespace grouse
