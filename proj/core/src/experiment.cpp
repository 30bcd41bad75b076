// Copyright 2026 The allocsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "allocsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "allocsim/downcrossing.hpp"
#include "allocsim/io.hpp"
#include "allocsim/rng.hpp"
#include "allocsim/verify.hpp"

namespace allocsim {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// number / bool / bare string; whitespace- or comma-separated numbers parse
// as an array
ordered_json parse_scalar(const std::string& raw) {
  const std::string value = trim(raw);
  if (value == "true") return true;
  if (value == "false") return false;

  std::string list = value;
  std::replace(list.begin(), list.end(), ',', ' ');
  std::istringstream stream(list);
  std::vector<double> numbers;
  std::string token;
  bool all_numbers = true;
  while (stream >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0') {
      all_numbers = false;
      break;
    }
    numbers.push_back(v);
  }
  if (all_numbers && numbers.size() > 1) return numbers;
  if (all_numbers && numbers.size() == 1) return numbers.front();
  return value;
}

// Typed access into one section of the resolved document.
class SectionView {
 public:
  SectionView(const ordered_json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      if (!doc.at(name_).is_object())
        throw ConfigError("[" + name_ + "] must be a section of key = value entries");
      section_ = &doc.at(name_);
    }
  }

  bool present() const { return section_ != nullptr; }
  bool has(const std::string& key) const { return section_ && section_->contains(key); }

  double number(const std::string& key) const {
    require(key);
    const ordered_json& v = section_->at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v)) throw ConfigError(where(key) + ": expected an integer");
    return static_cast<long>(v);
  }
  long integer_or(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string text(const std::string& key) const {
    require(key);
    const ordered_json& v = section_->at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  bool flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const ordered_json& v = section_->at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::vector<double> list(const std::string& key) const {
    require(key);
    const ordered_json& v = section_->at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(where(key) + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  void require(const std::string& key) const {
    if (!section_) throw ConfigError("missing [" + name_ + "] section");
    if (!section_->contains(key)) throw ConfigError(where(key) + ": missing");
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  const ordered_json* section_ = nullptr;
  std::string name_;
};

TargetFunction build_target(const SectionView& design) {
  const std::string kind = design.text_or("target", "");
  if (kind.empty())
    throw ConfigError("[design] target: missing (neyman, constant, or phi_z)");
  if (kind == "neyman") return TargetFunction::neyman();
  if (kind == "constant") return TargetFunction::constant(design.number("target_value"));
  if (kind == "phi_z") {
    // standard-normal CDF of the covariate, clamped off the endpoints so
    // extreme draws stay strictly inside (0,1)
    return TargetFunction::custom(
        [](std::span<const double>, double z) {
          return std::clamp(normal_cdf(z), 1e-12, 1.0 - 1e-12);
        },
        /*depends_on_params=*/false, /*depends_on_covariate=*/true);
  }
  throw ConfigError("[design] target: unknown kind '" + kind + "'");
}

std::function<double(double)> build_wei_function(const SectionView& design) {
  const std::string family = design.text_or("f_family", "odd_poly");
  const double param = design.number_or("f_param", 1.0);
  if (family == "odd_poly") {
    const int k = static_cast<int>(param);
    if (k < 1 || k % 2 == 0 || param != std::floor(param))
      throw ConfigError("[design] f_param: odd_poly needs an odd positive integer exponent");
    return [k](double u) { return (1.0 - std::pow(u, k)) / 2.0; };
  }
  if (family == "tanh") {
    if (!(param > 0.0)) throw ConfigError("[design] f_param: tanh needs a positive slope");
    return [param](double u) { return (1.0 - std::tanh(param * u)) / 2.0; };
  }
  throw ConfigError("[design] f_family: unknown family '" + family + "'");
}

std::function<double(double)> build_adjustable_function(const SectionView& design) {
  const std::string family = design.text_or("f_family", "logistic");
  const double slope = design.number_or("f_param", 1.0);
  if (family != "logistic")
    throw ConfigError("[design] f_family: unknown family '" + family + "'");
  if (!(slope > 0.0)) throw ConfigError("[design] f_param: logistic needs a positive slope");
  return [slope](double x) { return 1.0 / (1.0 + std::exp(slope * x)); };
}

DesignRule build_design(const SectionView& design, const SectionView& covariates, int arms) {
  const std::string kind = design.text_or("kind", "");
  if (kind.empty()) throw ConfigError("[design] kind: missing");

  if (kind == "cr") return AaRule::complete_randomization();
  if (kind == "efron") return AaRule::efron(design.number("p"));
  if (kind == "efron_extended")
    return AaRule::efron_extended(design.number("target_value"), design.number("p1"),
                                  design.number("p2"));
  if (kind == "wei") return AaRule::wei_adaptive(build_wei_function(design));
  if (kind == "abcd") return AaRule::adjustable_bcd(build_adjustable_function(design));
  if (kind == "aa_star") return AaRule::aa_star();
  if (kind == "wei_multi_odds") return AaRule::wei_multi_odds(arms);
  if (kind == "wei_multi_linear") return AaRule::wei_multi_linear(arms);

  if (kind == "dawd") return RaRule::dawd(design.number_or("rho", 0.5));
  if (kind == "dbcd") return RaRule::dbcd(design.number_or("nu", 2.0), build_target(design));
  if (kind == "erade") return RaRule::erade(design.number_or("alpha", 0.5), build_target(design));
  if (kind == "power")
    return RaRule::power_rule(design.number_or("tau", 2.0), build_target(design));
  if (kind == "sml") return RaRule::sml(build_target(design));

  if (kind == "eth") return CaraRule::eth();
  if (kind == "zhang_target") return CaraRule::zhang_target(build_target(design));
  if (kind == "zhang_hu")
    return CaraRule::zhang_hu(design.number_or("nu", 2.0), build_target(design));

  if (kind == "pocock_simon") return StrataRule::pocock_simon(design.number("p"));
  if (kind == "hu_hu") {
    const std::vector<double> w = design.list("weights");
    if (w.size() != 4)
      throw ConfigError("[design] weights: expected four values (global, t, w, stratum)");
    return StrataRule::hu_hu(design.number("p"), ImbalanceWeights{w[0], w[1], w[2], w[3]});
  }
  if (kind == "c_abcd") {
    const double power = design.number_or("q_power", 1.0);
    if (!(power > 0.0)) throw ConfigError("[design] q_power: must be positive");
    std::function<double(double)> q = [power](double p) { return std::pow(p, -power); };
    const std::string freqs = design.text_or("freqs", "estimated");
    if (freqs == "estimated") return StrataRule::c_abcd(q);
    if (freqs != "known") throw ConfigError("[design] freqs: expected 'known' or 'estimated'");
    if (!covariates.present())
      throw ConfigError("[design] freqs = known requires the [covariates] joint table");
    return StrataRule::c_abcd(q, covariates.list("probs"));
  }
  if (kind == "atkinson") return StrataRule::atkinson();
  if (kind == "atkinson_general")
    return StrataRule::atkinson_general(design.flag_or("interactions", true));
  if (kind == "rdbcd") {
    const long lt = covariates.integer_or("levels_t", 2);
    const long lw = covariates.integer_or("levels_w", 2);
    return StrataRule::rdbcd(static_cast<int>(lt), static_cast<int>(lw),
                             design.list("target_table"));
  }

  throw ConfigError("[design] kind: unknown design '" + kind + "'");
}

std::optional<ResponseModel> build_response(const SectionView& model) {
  if (!model.present()) return std::nullopt;
  const std::string kind = model.text_or("kind", "");
  if (kind == "binary") return ResponseModel{BinaryModel{model.number("pA"), model.number("pB")}};
  if (kind == "linear_interaction") {
    LinearInteractionModel m;
    m.mu_a = model.number("muA");
    m.mu_b = model.number("muB");
    m.beta_a = model.number("betaA");
    m.beta_b = model.number("betaB");
    m.noise_sd = model.number_or("sd", 1.0);
    return ResponseModel{m};
  }
  if (kind == "linear_common") {
    LinearCommonSlopeModel m;
    m.mu_a = model.number("muA");
    m.mu_b = model.number("muB");
    m.beta = model.list("beta");
    m.noise_sd = model.number_or("sd", 1.0);
    const int degree = static_cast<int>(m.beta.size());
    m.feature_map = [degree](double z) {
      std::vector<double> f(static_cast<std::size_t>(degree));
      double power = 1.0;
      for (int i = 0; i < degree; ++i) {
        power *= z;
        f[static_cast<std::size_t>(i)] = power;
      }
      return f;
    };
    return ResponseModel{m};
  }
  throw ConfigError("[model] kind: unknown model '" + kind + "'");
}

std::optional<CovariateModel> build_covariates(const SectionView& covariates) {
  if (!covariates.present()) return std::nullopt;
  const std::string kind = covariates.text_or("kind", "");
  if (kind == "normal")
    return CovariateModel{
        NormalCovariateModel{covariates.number_or("mean", 0.0), covariates.number_or("sd", 1.0)}};
  if (kind == "categorical") {
    CategoricalCovariateModel m;
    m.levels_t = static_cast<int>(covariates.integer_or("levels_t", 2));
    m.levels_w = static_cast<int>(covariates.integer_or("levels_w", 2));
    m.joint = covariates.list("probs");
    return CovariateModel{m};
  }
  throw ConfigError("[covariates] kind: unknown model '" + kind + "'");
}

struct LimitInfo {
  std::vector<double> per_arm;       // length K
  std::vector<double> per_stratum;   // stratified designs
  std::vector<std::string> stratum_labels;
  std::string diagnostics;
};

std::vector<double> true_params_from_model(const ResponseModel& model) {
  if (const auto* binary = std::get_if<BinaryModel>(&model))
    return {binary->success_a, binary->success_b};
  if (const auto* interaction = std::get_if<LinearInteractionModel>(&model))
    return {interaction->mu_a, interaction->mu_b, interaction->beta_a, interaction->beta_b};
  const auto& common = std::get<LinearCommonSlopeModel>(model);
  std::vector<double> params = {common.mu_a, common.mu_b};
  params.insert(params.end(), common.beta.begin(), common.beta.end());
  return params;
}

LimitInfo compute_limit(const TrialConfig& config) {
  LimitInfo info;
  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, AaRule>) {
          info.per_arm = rule.limit();
          const DowncrossingResult d = rule.limit_diagnostics();
          std::ostringstream os;
          os << (d.kind == CrossingKind::kJump ? "jump" : "fixed-point")
             << " downcrossing, residual " << d.residual << ", bracket " << d.bracket_width;
          info.diagnostics = os.str();
        } else if constexpr (std::is_same_v<T, RaRule>) {
          const std::vector<double> params = true_params_from_model(*config.response);
          const double t = rule.limit(params);
          info.per_arm = {t, 1.0 - t};
          info.diagnostics = "generalized downcrossing at the true parameters";
        } else if constexpr (std::is_same_v<T, CaraRule>) {
          const std::vector<double> params = true_params_from_model(*config.response);
          Rng rng(config.seed, 0x1117);
          const CaraLimitResult r = cara_limit(rule, params, *config.covariates,
                                               CaraLimitMode::kClosedForm, 400000, rng);
          info.per_arm = {r.value, 1.0 - r.value};
          std::ostringstream os;
          os << "covariate-averaged limit";
          if (r.std_error > 0.0) os << ", MC std error " << r.std_error;
          info.diagnostics = os.str();
        } else {
          const auto& cov = std::get<CategoricalCovariateModel>(*config.covariates);
          const StrataRule::Limit l = rule.limit(cov.joint);
          info.per_stratum = l.per_stratum;
          info.per_arm = {l.overall, 1.0 - l.overall};
          for (int j = 0; j < cov.levels_t; ++j)
            for (int w = 0; w < cov.levels_w; ++w)
              info.stratum_labels.push_back(std::to_string(j) + ":" + std::to_string(w));
          info.diagnostics = "per-stratum limits weighted by the joint covariate distribution";
        }
      },
      config.design);
  return info;
}

void apply_overrides(ordered_json& doc, const SpecOverrides& overrides) {
  if (!doc.contains("run") || !doc["run"].is_object()) doc["run"] = ordered_json::object();
  if (overrides.seed) doc["run"]["seed"] = *overrides.seed;
  if (overrides.replications) doc["run"]["reps"] = *overrides.replications;
  if (overrides.horizon) doc["run"]["horizon"] = *overrides.horizon;
  if (overrides.threads) doc["run"]["threads"] = *overrides.threads;
  if (overrides.out_dir) doc["run"]["out"] = *overrides.out_dir;
  if (overrides.format) doc["run"]["format"] = *overrides.format;
}

}  // namespace

ordered_json parse_sectioned_spec(const std::string& text) {
  ordered_json doc = ordered_json::object();
  std::string section;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("spec line " + std::to_string(line_number) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("spec line " + std::to_string(line_number) + ": empty section name");
      if (!doc.contains(section)) doc[section] = ordered_json::object();
      continue;
    }
    const auto equals = line.find('=');
    if (equals == std::string::npos)
      throw ConfigError("spec line " + std::to_string(line_number) + ": expected key = value");
    if (section.empty())
      throw ConfigError("spec line " + std::to_string(line_number) +
                        ": key outside any [section]");
    const std::string key = trim(line.substr(0, equals));
    if (key.empty())
      throw ConfigError("spec line " + std::to_string(line_number) + ": empty key");
    doc[section][key] = parse_scalar(line.substr(equals + 1));
  }
  return doc;
}

ExperimentSpec load_experiment(const std::filesystem::path& file, const SpecOverrides& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open spec file " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  ordered_json doc;
  if (first != std::string::npos && text[first] == '{') {
    doc = ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("spec file is not valid JSON: " + file.string());
  } else {
    doc = parse_sectioned_spec(text);
  }
  return experiment_from_json(std::move(doc), overrides);
}

ExperimentSpec experiment_from_json(ordered_json document, const SpecOverrides& overrides) {
  apply_overrides(document, overrides);

  const SectionView design(document, "design");
  const SectionView model(document, "model");
  const SectionView covariates(document, "covariates");
  const SectionView run(document, "run");

  ExperimentSpec spec;
  spec.config.arms = static_cast<int>(run.integer_or("arms", 2));
  spec.config.design = build_design(design, covariates, spec.config.arms);
  spec.config.response = build_response(model);
  spec.config.covariates = build_covariates(covariates);
  spec.config.horizon = run.integer_or("horizon", 1000);
  spec.config.initial_per_arm = static_cast<int>(run.integer_or("m", 0));
  spec.config.seed = static_cast<std::uint64_t>(run.integer_or("seed", 0));
  spec.config.record_stride = static_cast<int>(run.integer_or("stride", 10));
  spec.replications = static_cast<int>(run.integer_or("reps", 100));
  spec.epsilon = run.number_or("epsilon", 0.05);
  spec.threads = static_cast<int>(run.integer_or("threads", 0));
  spec.out_dir = run.text_or("out", "allocsim-out");
  spec.format = run.text_or("format", "csv");
  if (spec.format != "csv" && spec.format != "json")
    throw ConfigError("[run] format: expected csv or json");
  if (spec.replications < 1) throw ConfigError("[run] reps: must be >= 1");
  if (!(spec.epsilon > 0.0)) throw ConfigError("[run] epsilon: must be positive");

  validate(spec.config);
  spec.resolved = std::move(document);
  return spec;
}

int cmd_simulate(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  try {
    const ReplicationSummary summary =
        run_replications(spec.config, spec.replications, spec.config.seed, spec.threads);

    const LimitInfo limit = compute_limit(spec.config);
    const ConvergenceReport report =
        convergence_report(summary, limit.per_arm, spec.epsilon, limit.per_stratum);

    TrialConfig first = spec.config;
    first.stream = 0;
    const Trajectory trajectory = run_trial(first);

    const fs::path trajectory_path =
        spec.out_dir / (spec.format == "csv" ? "trajectory.csv" : "trajectory.json");
    if (spec.format == "csv") {
      std::ostringstream csv;
      write_trajectory_csv(trajectory, csv);
      write_file_atomic(trajectory_path, csv.str());
    } else {
      write_file_atomic(trajectory_path, trajectory_json(trajectory).dump(2) + "\n");
    }
    written.push_back(trajectory_path);

    const fs::path summary_path = spec.out_dir / "summary.json";
    write_file_atomic(summary_path, summary_json(summary, &report, &spec.resolved).dump(2) + "\n");
    written.push_back(summary_path);

    out << "limit " << limit.per_arm[0] << "  mean|pi_N - t| " << report.mean_abs_error
        << "  coverage(eps=" << spec.epsilon << ") " << report.fraction_within << "\n";
    out << "wrote " << trajectory_path.string() << " and " << summary_path.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    for (const fs::path& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    err << "simulate failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_limit(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const LimitInfo limit = compute_limit(spec.config);
    out << "limit (arm A): " << limit.per_arm[0] << "\n";
    if (limit.per_arm.size() > 2) {
      out << "per-arm:";
      for (double t : limit.per_arm) out << ' ' << t;
      out << "\n";
    }
    if (!limit.per_stratum.empty()) {
      out << "per-stratum:";
      for (std::size_t i = 0; i < limit.per_stratum.size(); ++i)
        out << ' ' << limit.stratum_labels[i] << '=' << limit.per_stratum[i];
      out << "\n";
    }
    out << "diagnostics: " << limit.diagnostics << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "limit failed: " << e.what() << "\n";
    return 2;
  }
}

int cmd_verify(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const std::vector<PropertyCheck> checks = verify_design(spec.config.design);
    for (const PropertyCheck& c : checks) {
      out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
      if (!c.passed && !c.detail.empty()) out << " — " << c.detail;
      out << "\n";
    }
    return all_passed(checks) ? 0 : 1;
  } catch (const std::exception& e) {
    err << "verify failed: " << e.what() << "\n";
    return 2;
  }
}

int cmd_list_designs(std::ostream& out) {
  for (const DesignInfo& d : design_catalog()) {
    out << d.display << "\t" << to_string(d.cls) << "\tkind=" << d.name << "\t" << d.parameters
        << "\t" << d.description << "\n";
  }
  out << design_catalog().size() << " designs\n";
  return 0;
}

}  // namespace allocsim
