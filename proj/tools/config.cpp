#include "config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dromo/io.hpp"

namespace dromo::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& ctx) {
  try {
    return parse_double(v, ctx);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

long to_long(const std::string& v, const std::string& ctx) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (v.empty() || pos != v.size()) throw ConfigError(ctx + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(ctx + ": expected true or false, got '" + v + "'");
}

template <typename E>
E to_enum(const std::string& v, const std::string& ctx, const std::map<std::string, E>& options) {
  auto it = options.find(v);
  if (it == options.end()) {
    std::string names;
    for (const auto& [k, _] : options) names += (names.empty() ? "" : ", ") + k;
    throw ConfigError(ctx + ": expected one of {" + names + "}, got '" + v + "'");
  }
  return it->second;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.env = v; }},
      {"gamma", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         c.gamma = to_double(v, x);
         c.loop.gamma = c.gamma;
       }},
      {"behavior", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         if (v != "uniform" && v != "random") throw ConfigError(x + ": expected uniform or random");
         c.behavior = v;
       }},
      {"n_transitions", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.n_transitions = to_long(v, x); }},
      {"episode_length", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.episode_length = static_cast<int>(to_long(v, x)); }},
      {"mdp_file", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.mdp_file = v; }},
      {"dataset_file", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.dataset_file = v; }},
      {"algorithm", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         if (v != "dromo" && v != "combo" && v != "mopo") throw ConfigError(x + ": expected dromo, combo or mopo");
         c.algorithm = v;
       }},
      {"alpha", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic.alpha = to_double(v, x); }},
      {"beta", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         if (v == "auto") {
           c.loop.beta_auto = true;
         } else {
           c.loop.beta_auto = false;
           c.loop.critic.beta = to_double(v, x);
         }
       }},
      {"beta_safety", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.beta_safety = to_double(v, x); }},
      {"f", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic.f = to_double(v, x); }},
      {"interp_convention", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         c.loop.convention = to_enum<InterpConvention>(
             v, x, {{"verbatim", InterpConvention::kVerbatim}, {"data_weighted", InterpConvention::kDataWeighted}});
       }},
      {"critic_rule", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         c.loop.critic.rule = to_enum<CriticRule>(
             v, x, {{"exact", CriticRule::kExactMinimizer}, {"closed_form", CriticRule::kClosedForm}});
       }},
      {"inner_iters", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic.inner_iters = static_cast<int>(to_long(v, x)); }},
      {"inner_tol", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic.inner_tol = to_double(v, x); }},
      {"lambda_pen", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.mopo.lambda_pen = to_double(v, x); }},
      {"delta_t", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.mopo.delta_t = to_double(v, x); }},
      {"eta_alpha", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.mopo.eta_alpha = to_double(v, x); }},
      {"auto_temp", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.mopo.auto_temp = to_bool(v, x); }},
      {"max_temp_steps", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.mopo.max_temp_steps = static_cast<int>(to_long(v, x)); }},
      {"max_iters", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.max_iters = static_cast<int>(to_long(v, x)); }},
      {"critic_iters", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic_iters = static_cast<int>(to_long(v, x)); }},
      {"critic_tol", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.critic_tol = to_double(v, x); }},
      {"tau", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.tau = to_double(v, x); }},
      {"entropy_weight", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.entropy_weight = to_double(v, x); }},
      {"rho_mode", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         c.loop.rho_mode = to_enum<RhoMode>(v, x, {{"analytic", RhoMode::kAnalytic}, {"buffer", RhoMode::kBuffer}});
       }},
      {"rollouts", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.rollouts = static_cast<int>(to_long(v, x)); }},
      {"horizon", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.horizon = static_cast<int>(to_long(v, x)); }},
      {"accumulate_buffer", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.accumulate_buffer = to_bool(v, x); }},
      {"buffer_capacity", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         long n = to_long(v, x);
         if (n < 1) throw ConfigError(x + ": must be positive");
         c.loop.buffer_capacity = static_cast<std::size_t>(n);
       }},
      {"init_sampling", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         c.loop.init_sampling = to_enum<InitialStateSampling>(
             v, x, {{"uniform_states", InitialStateSampling::kUniformStates},
                    {"uniform_records", InitialStateSampling::kUniformRecords}});
       }},
      {"model_smoothing", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.model_smoothing = to_double(v, x); }},
      {"r_max", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.constants.r_max = to_double(v, x); }},
      {"c_r_delta", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.constants.c_r_delta = to_double(v, x); }},
      {"c_t_delta", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.constants.c_t_delta = to_double(v, x); }},
      {"c_rt_delta", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.constants.c_rt_delta = to_double(v, x); }},
      {"kappa_var", [](ExperimentConfig& c, const std::string& v, const std::string& x) { c.loop.constants.kappa_var = to_double(v, x); }},
      {"seed", [](ExperimentConfig& c, const std::string& v, const std::string& x) {
         long s = to_long(v, x);
         if (s < 0) throw ConfigError(x + ": seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"out_dir", [](ExperimentConfig& c, const std::string& v, const std::string&) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string ctx = source + ":" + std::to_string(lineno);
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(ctx + ": expected 'key = value'");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    auto it = setters().find(k);
    if (it == setters().end()) throw ConfigError(ctx + ": unknown key '" + k + "'");
    if (!seen.insert(k).second) throw ConfigError(ctx + ": duplicate key '" + k + "'");
    it->second(cfg, v, ctx + " (" + k + ")");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string describe_config(const ExperimentConfig& c) {
  std::ostringstream o;
  const LoopConfig& l = c.loop;
  auto d = [](double x) { return format_double(x); };
  o << "env = " << c.env << '\n'
    << "gamma = " << d(c.gamma) << '\n'
    << "behavior = " << c.behavior << '\n'
    << "n_transitions = " << c.n_transitions << '\n'
    << "episode_length = " << c.episode_length << '\n'
    << "algorithm = " << c.algorithm << '\n'
    << "alpha = " << d(l.critic.alpha) << '\n'
    << "beta = " << (l.beta_auto ? std::string("auto") : d(l.critic.beta)) << '\n'
    << "beta_safety = " << d(l.beta_safety) << '\n'
    << "f = " << d(l.critic.f) << '\n'
    << "interp_convention = " << (l.convention == InterpConvention::kVerbatim ? "verbatim" : "data_weighted") << '\n'
    << "critic_rule = " << (l.critic.rule == CriticRule::kExactMinimizer ? "exact" : "closed_form") << '\n'
    << "lambda_pen = " << d(l.mopo.lambda_pen) << '\n'
    << "delta_t = " << d(l.mopo.delta_t) << '\n'
    << "eta_alpha = " << d(l.mopo.eta_alpha) << '\n'
    << "auto_temp = " << (l.mopo.auto_temp ? "true" : "false") << '\n'
    << "max_iters = " << l.max_iters << '\n'
    << "critic_iters = " << l.critic_iters << '\n'
    << "critic_tol = " << d(l.critic_tol) << '\n'
    << "tau = " << d(l.tau) << '\n'
    << "entropy_weight = " << d(l.entropy_weight) << '\n'
    << "rho_mode = " << (l.rho_mode == RhoMode::kAnalytic ? "analytic" : "buffer") << '\n'
    << "rollouts = " << l.rollouts << '\n'
    << "horizon = " << l.horizon << '\n'
    << "model_smoothing = " << d(l.model_smoothing) << '\n';
  if (c.seed) o << "seed = " << *c.seed << '\n';
  return o.str();
}

}  // namespace dromo::cli
