// geohmm command-line front end.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geohmm/circstats.hpp"
#include "geohmm/errors.hpp"
#include "geohmm/evalkl.hpp"
#include "geohmm/model_io.hpp"
#include "geohmm/pipeline.hpp"
#include "geohmm/render.hpp"
#include "geohmm/simgen.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace geohmm;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitInput = 2;
constexpr int kExitImpossible = 3;
constexpr int kExitCheck = 4;

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string content_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct Session {
  bool write_manifest = true;
  std::ostringstream out;
  json manifest = json::object();
  std::vector<std::string> argv;  // as it will be replayed
  fs::path manifest_path;

  void input(const fs::path& p) {
    manifest["inputs"][p.string()] = content_hash(read_text_file(p));
  }
  void output(const fs::path& p, const std::string& content) {
    write_text_file_atomic(p, content);
    manifest["outputs"][p.string()] = content_hash(content);
  }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GEOHMM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("GEOHMM_SEED is not an unsigned integer");
  }
  return 0;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

fs::path with_suffix(const fs::path& p, const std::string& tag) {
  auto q = p;
  q.replace_filename(p.stem().string() + tag + p.extension().string());
  return q;
}

// ---------------------------------------------------------------- make-loop

struct MakeLoopArgs {
  fs::path out;
  std::vector<double> corridors{1200.0, 800.0, 1200.0, 800.0};
  std::vector<std::size_t> states{4, 4, 4, 4};
  double obs_noise = 0.25, sigma = 10.0, kappa = 200.0;
  double p_forward = 0.85, p_skip = 0.10, p_stay = 0.05;
  std::string mode = "relative";
};

void cmd_make_loop(const MakeLoopArgs& a, Session& s) {
  LoopSpec spec;
  spec.corridor_lengths = a.corridors;
  spec.states_per_corridor = a.states;
  spec.obs_noise = a.obs_noise;
  spec.sigma_x = spec.sigma_y = a.sigma;
  spec.kappa = a.kappa;
  spec.p_forward = a.p_forward;
  spec.p_skip = a.p_skip;
  spec.p_stay = a.p_stay;
  spec.mode = parse_mode(a.mode);
  const auto model = make_loop_model(spec);
  s.manifest["config"] = {{"corridors", a.corridors}, {"states_per_corridor", a.states},
                          {"obs_noise", a.obs_noise}, {"sigma", a.sigma}, {"kappa", a.kappa},
                          {"p_forward", a.p_forward}, {"p_skip", a.p_skip},
                          {"p_stay", a.p_stay}, {"mode", a.mode}};
  s.output(a.out, format_model(model));
  s.out << "wrote " << model.n_states() << "-state loop model to " << a.out.string() << "\n";
  s.manifest["summary"] = {{"n_states", model.n_states()}};
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  fs::path model, out;
  std::size_t length = 800;
  std::optional<std::uint64_t> seed;
};

void cmd_simulate(const SimulateArgs& a, Session& s, std::uint64_t seed) {
  s.input(a.model);
  const auto model = load_model(a.model);
  Rng rng(seed);
  const auto seq = sample_sequence(model, a.length, rng);
  s.manifest["config"] = {{"length", a.length}};
  s.output(a.out, format_experience(seq, {}, model.obs_dims()));
  s.out << "wrote " << seq.length() << " steps to " << a.out.string() << "\n";
  s.manifest["summary"] = {{"steps", seq.length()}, {"readings", seq.readings().size()}};
}

// --------------------------------------------------------------------- init

struct BucketArgs {
  double sigma = 40.0;
  double sigma_theta_deg = 15.0;

  BucketConfig config() const {
    BucketConfig c;
    c.sigma_x = c.sigma_y = sigma;
    c.sigma_theta = degrees_to_radians(sigma_theta_deg);
    return c;
  }
  json to_json() const { return {{"sigma", sigma}, {"sigma_theta_deg", sigma_theta_deg}}; }
};

struct InitArgs {
  fs::path experience, out;
  std::size_t states = 0;
  std::string mode = "relative";
  BucketArgs buckets;
};

void cmd_init(const InitArgs& a, Session& s) {
  s.input(a.experience);
  const auto file = load_experience(a.experience);
  const auto dims = effective_alphabet(file);
  const auto model = init_model(file.sequence, a.states, dims, a.buckets.config(), parse_mode(a.mode));
  s.manifest["config"] = {{"states", a.states}, {"mode", a.mode}, {"buckets", a.buckets.to_json()}};
  s.output(a.out, format_model(model));
  const double ll = log_likelihood(model, file.sequence);
  s.out << "initial model log-likelihood " << fixed(ll) << "\n";
  s.manifest["summary"] = {{"loglik", ll}};
}

// -------------------------------------------------------------------- learn

struct LearnArgs {
  fs::path experience, out, report, initial, eval_true;
  std::size_t states = 0;
  std::string constraints = "additive";
  std::string mode = "relative";
  bool no_odometry = false;
  std::size_t restarts = 1;
  std::optional<std::uint64_t> seed;
  std::size_t max_iters = 200;
  double rel_tol = 1e-6;
  double prob_floor = 1e-3;
  double held_threshold = 1.0;
  std::size_t additive_from = 0;
  double jitter = 0.1;
  std::vector<std::size_t> prefix_lengths;
  std::size_t kl_length = 1000;
  std::size_t kl_count = 10;
  BucketArgs buckets;
};

json run_json(const RestartOutcome& run, const std::optional<KlEstimate>& kl) {
  const auto& rep = run.result.report;
  json j = {{"seed", run.seed},
            {"iterations", rep.iterations_run},
            {"converged", rep.converged},
            {"loglik_initial", rep.loglik_trace.front()},
            {"loglik_final", rep.loglik_trace.back()},
            {"loglik_trace", rep.loglik_trace}};
  json v = json::array();
  for (const auto& [it, drop] : rep.monotonicity_violations) v.push_back({it, drop});
  j["monotonicity_violations"] = v;
  if (kl) {
    j["kl"] = {{"value", kl->infinite ? json("inf") : json(kl->value)},
               {"std_error", kl->infinite ? json("inf") : json(kl->std_error)}};
  }
  return j;
}

void cmd_learn(const LearnArgs& a, Session& s, std::uint64_t seed) {
  s.input(a.experience);
  const auto file = load_experience(a.experience);

  PipelineConfig cfg;
  cfg.learn.constraint_level = parse_level(a.constraints);
  cfg.learn.mode = parse_mode(a.mode);
  cfg.learn.use_odometry = !a.no_odometry;
  cfg.learn.max_iters = a.max_iters;
  cfg.learn.rel_tol = a.rel_tol;
  cfg.learn.prob_floor = a.prob_floor;
  cfg.learn.held_weight_threshold = a.held_threshold;
  cfg.learn.additive_from_iteration = a.additive_from;
  cfg.learn.rng_seed = seed;
  cfg.restarts = a.restarts;
  cfg.seed = seed;
  cfg.buckets = a.buckets.config();
  cfg.init_jitter = a.jitter;

  std::vector<std::size_t> dims = effective_alphabet(file);
  if (!a.initial.empty()) {
    s.input(a.initial);
    cfg.initial = load_model(a.initial);
    if (cfg.initial->mode != cfg.learn.mode) {
      throw InputError("initial model mode does not match --mode");
    }
    dims = cfg.initial->obs_dims();
    cfg.n_states = a.states ? a.states : cfg.initial->n_states();
  } else {
    if (a.states == 0) throw InputError("--states is required without --initial");
    cfg.n_states = a.states;
  }

  std::optional<GeoHmm> truth;
  if (!a.eval_true.empty()) {
    s.input(a.eval_true);
    truth = load_model(a.eval_true);
    dims = truth->obs_dims();
  }
  file.sequence.check_alphabet(dims);

  s.manifest["config"] = {{"states", cfg.n_states},
                          {"constraints", a.constraints},
                          {"mode", a.mode},
                          {"use_odometry", !a.no_odometry},
                          {"restarts", a.restarts},
                          {"max_iters", a.max_iters},
                          {"rel_tol", a.rel_tol},
                          {"prob_floor", a.prob_floor},
                          {"held_threshold", a.held_threshold},
                          {"additive_from", a.additive_from},
                          {"jitter", a.jitter},
                          {"buckets", a.buckets.to_json()},
                          {"prefix_lengths", a.prefix_lengths},
                          {"kl_length", a.kl_length},
                          {"kl_count", a.kl_count}};

  std::vector<std::size_t> lengths = a.prefix_lengths;
  const bool sweep = !lengths.empty();
  if (!sweep) lengths.push_back(file.sequence.length());

  json report = {{"experience", a.experience.string()}, {"cells", json::array()}};
  json summary = json::array();
  s.out << std::left << std::setw(8) << "prefix" << std::setw(9) << "restart" << std::setw(7)
        << "iters" << std::setw(6) << "conv" << std::setw(18) << "loglik";
  if (truth) s.out << "kl";
  s.out << "\n";

  for (auto len : lengths) {
    if (len < 2 || len > file.sequence.length()) {
      throw InputError("prefix length " + std::to_string(len) + " out of range");
    }
    const auto seq = file.sequence.prefix(len);
    const auto result = learn_restarts(seq, dims, cfg);

    json cell = {{"length", len}, {"best", result.best}, {"runs", json::array()}};
    double kl_sum = 0.0, iter_sum = 0.0;
    bool kl_inf = false;
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
      const auto& run = result.runs[r];
      std::optional<KlEstimate> kl;
      if (truth) {
        Rng krng(Rng::derive_seed(seed, 0x6b6cULL));
        kl = kl_sampled(*truth, run.result.model, a.kl_length, a.kl_count, krng);
        kl_inf = kl_inf || kl->infinite;
        kl_sum += kl->value;
      }
      iter_sum += static_cast<double>(run.result.report.iterations_run);
      cell["runs"].push_back(run_json(run, kl));
      s.out << std::setw(8) << len << std::setw(9) << r << std::setw(7)
            << run.result.report.iterations_run << std::setw(6)
            << (run.result.report.converged ? "yes" : "no") << std::setw(18)
            << fixed(run.final_loglik(), 4);
      if (kl) s.out << (kl->infinite ? std::string("inf") : fixed(kl->value));
      s.out << "\n";
    }
    const double runs = static_cast<double>(result.runs.size());
    cell["mean_iterations"] = iter_sum / runs;
    if (truth) cell["mean_kl"] = kl_inf ? json("inf") : json(kl_sum / runs);
    summary.push_back({{"length", len},
                       {"best_loglik", result.runs[result.best].final_loglik()},
                       {"mean_iterations", cell["mean_iterations"]}});
    if (truth) summary.back()["mean_kl"] = cell["mean_kl"];
    report["cells"].push_back(std::move(cell));

    const auto out = sweep ? with_suffix(a.out, ".p" + std::to_string(len)) : a.out;
    s.output(out, format_model(result.best_model()));
  }
  if (!a.report.empty()) s.output(a.report, report.dump(1) + "\n");
  s.manifest["summary"] = summary;
}

// ------------------------------------------------------------------ eval-kl

struct EvalArgs {
  fs::path truth, learned;
  std::size_t length = 1000, count = 10;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

void cmd_eval_kl(const EvalArgs& a, Session& s, std::uint64_t seed) {
  s.input(a.truth);
  s.input(a.learned);
  const auto t = load_model(a.truth);
  const auto l = load_model(a.learned);
  Rng rng(seed);
  const auto est = kl_sampled(t, l, a.length, a.count, rng);
  s.manifest["config"] = {{"length", a.length}, {"count", a.count}};
  json j = {{"kl", est.infinite ? json("inf") : json(est.value)},
            {"std_error", est.infinite ? json("inf") : json(est.std_error)},
            {"n_sequences", est.n_sequences},
            {"seq_length", est.seq_length},
            {"infinite", est.infinite}};
  if (a.format == "json") {
    s.out << j.dump(1) << "\n";
  } else if (est.infinite) {
    s.out << "kl = inf (learned model gives a sampled sequence zero probability)\n";
  } else {
    s.out << "kl = " << fixed(est.value) << " +/- " << fixed(est.std_error)
          << " nats/symbol (" << est.n_sequences << " x " << est.seq_length << ")\n";
  }
  s.manifest["summary"] = j;
}

// -------------------------------------------------------------------- check

struct CheckArgs {
  fs::path model;
  std::string level = "additive";
  double tol = 1e-9;
  std::string format = "text";
};

void cmd_check(const CheckArgs& a, Session& s) {
  s.input(a.model);
  const auto m = load_model(a.model);
  const auto v = check_consistency(m, parse_level(a.level), a.tol);
  s.manifest["config"] = {{"level", a.level}, {"tol", a.tol}};
  if (a.format == "json") {
    json arr = json::array();
    for (const auto& x : v) {
      arr.push_back({{"kind", to_string(x.kind)}, {"component", to_string(x.component)},
                     {"a", x.a}, {"b", x.b}, {"c", x.c}, {"magnitude", x.magnitude}});
    }
    s.out << json({{"level", a.level}, {"tol", a.tol}, {"violations", arr}}).dump(1) << "\n";
  } else if (v.empty()) {
    s.out << "ok: no " << a.level << " violations above " << a.tol << "\n";
  } else {
    s.out << std::left << std::setw(15) << "kind" << std::setw(7) << "comp" << std::setw(5) << "a"
          << std::setw(5) << "b" << std::setw(5) << "c" << "magnitude\n";
    for (const auto& x : v) {
      s.out << std::setw(15) << to_string(x.kind) << std::setw(7) << to_string(x.component)
            << std::setw(5) << x.a << std::setw(5) << x.b << std::setw(5) << x.c << x.magnitude
            << "\n";
    }
    s.out << v.size() << " violation(s)\n";
  }
  s.manifest["summary"] = {{"violations", v.size()}};
  if (!v.empty()) throw CheckFailed(std::to_string(v.size()) + " consistency violation(s)");
}

// ------------------------------------------------------------------- render

struct RenderArgs {
  fs::path model, out;
  double dashed = 0.2;
};

void cmd_render(const RenderArgs& a, Session& s) {
  s.input(a.model);
  const auto m = load_model(a.model);
  RenderOptions opts;
  opts.dashed_threshold = a.dashed;
  s.manifest["config"] = {{"dashed_threshold", a.dashed}};
  s.output(a.out, render_svg(m, opts));
  s.out << "wrote " << a.out.string() << "\n";
}

// ------------------------------------------------------------------- driver

int run(std::vector<std::string> args, Session& s);

int replay(const fs::path& manifest_path, Session& outer) {
  json m;
  try {
    m = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw InputError("manifest has no argv");
  const auto argv = m["argv"].get<std::vector<std::string>>();
  const auto here = fs::current_path();
  if (m.contains("working_directory")) fs::current_path(m["working_directory"].get<std::string>());
  Session inner;
  inner.write_manifest = false;
  int code = 0;
  try {
    code = run(argv, inner);
  } catch (const std::system_error& e) {
    code = e.code().value();
  }
  fs::current_path(here);
  std::vector<std::string> mismatches;
  if (code != m.value("exit_code", 0)) mismatches.push_back("exit code");
  if (m.contains("outputs")) {
    for (const auto& [path, hash] : m["outputs"].items()) {
      const auto& outs = inner.manifest["outputs"];
      const auto got = outs.is_object() ? outs.value(path, std::string{}) : std::string{};
      if (got != hash.get<std::string>()) mismatches.push_back(path);
    }
  }
  if (content_hash(inner.out.str()) != m.value("stdout_hash", std::string{})) {
    mismatches.push_back("stdout");
  }
  outer.out << inner.out.str();
  if (!mismatches.empty()) {
    std::string what = "replay differs from the manifest:";
    for (const auto& x : mismatches) what += " " + x;
    throw std::runtime_error(what);
  }
  outer.out << "replay ok: outputs identical to " << manifest_path.string() << "\n";
  return 0;
}

int run(std::vector<std::string> args, Session& s) {
  CLI::App app{"Learning hidden Markov models with geometric constraints"};
  app.require_subcommand(1);
  std::string manifest_flag;
  auto add_manifest = [&](CLI::App* c) {
    c->add_option("--manifest", manifest_flag, "Run manifest path (default: derived)");
  };

  MakeLoopArgs ml;
  auto* c_ml = app.add_subcommand("make-loop", "Write a synthetic corridor-loop model");
  c_ml->add_option("--out", ml.out, "Model file")->required();
  c_ml->add_option("--corridors", ml.corridors, "Corridor lengths")->delimiter(',');
  c_ml->add_option("--states-per-corridor", ml.states, "States per corridor")->delimiter(',');
  c_ml->add_option("--obs-noise", ml.obs_noise, "Observation confusion mass");
  c_ml->add_option("--sigma", ml.sigma, "Odometric position noise (std dev)");
  c_ml->add_option("--kappa", ml.kappa, "Odometric heading concentration");
  c_ml->add_option("--p-forward", ml.p_forward);
  c_ml->add_option("--p-skip", ml.p_skip);
  c_ml->add_option("--p-stay", ml.p_stay);
  c_ml->add_option("--mode", ml.mode)->check(CLI::IsMember({"global", "relative"}));
  add_manifest(c_ml);

  SimulateArgs sa;
  auto* c_sim = app.add_subcommand("simulate", "Sample an experience sequence from a model");
  c_sim->add_option("--model", sa.model)->required();
  c_sim->add_option("--length", sa.length, "Number of steps")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sa.seed);
  c_sim->add_option("--out", sa.out)->required();
  add_manifest(c_sim);

  InitArgs ia;
  auto* c_init = app.add_subcommand("init", "Bucketing and state-tagging initialization");
  c_init->add_option("--experience", ia.experience)->required();
  c_init->add_option("--states", ia.states)->required()->check(CLI::PositiveNumber);
  c_init->add_option("--mode", ia.mode)->check(CLI::IsMember({"global", "relative"}));
  c_init->add_option("--bucket-sigma", ia.buckets.sigma);
  c_init->add_option("--bucket-sigma-theta", ia.buckets.sigma_theta_deg, "Degrees");
  c_init->add_option("--out", ia.out)->required();
  add_manifest(c_init);

  LearnArgs la;
  auto* c_learn = app.add_subcommand("learn", "Learn a model with EM");
  c_learn->add_option("--experience", la.experience)->required();
  c_learn->add_option("--states", la.states);
  c_learn->add_option("--initial", la.initial, "Start from this model");
  c_learn->add_option("--constraints", la.constraints)
      ->check(CLI::IsMember({"none", "antisym", "additive"}));
  c_learn->add_option("--mode", la.mode)->check(CLI::IsMember({"global", "relative"}));
  c_learn->add_flag("--no-odometry", la.no_odometry, "Plain Baum-Welch on the observations");
  c_learn->add_option("--restarts", la.restarts)->check(CLI::PositiveNumber);
  c_learn->add_option("--seed", la.seed);
  c_learn->add_option("--max-iters", la.max_iters)->check(CLI::PositiveNumber);
  c_learn->add_option("--rel-tol", la.rel_tol);
  c_learn->add_option("--prob-floor", la.prob_floor, "Lower bound on A and B entries");
  c_learn->add_option("--held-threshold", la.held_threshold);
  c_learn->add_option("--additive-from", la.additive_from);
  c_learn->add_option("--jitter", la.jitter, "Initialization jitter");
  c_learn->add_option("--bucket-sigma", la.buckets.sigma);
  c_learn->add_option("--bucket-sigma-theta", la.buckets.sigma_theta_deg, "Degrees");
  c_learn->add_option("--prefix-lengths", la.prefix_lengths)->delimiter(',');
  c_learn->add_option("--eval-true", la.eval_true, "Score every restart by KL against this model");
  c_learn->add_option("--kl-length", la.kl_length)->check(CLI::PositiveNumber);
  c_learn->add_option("--kl-count", la.kl_count)->check(CLI::PositiveNumber);
  c_learn->add_option("--out", la.out)->required();
  c_learn->add_option("--report", la.report, "JSON report with every restart");
  add_manifest(c_learn);

  EvalArgs ea;
  auto* c_eval = app.add_subcommand("eval-kl", "Sampled KL divergence between two models");
  c_eval->add_option("--true", ea.truth)->required();
  c_eval->add_option("--learned", ea.learned)->required();
  c_eval->add_option("--length", ea.length)->check(CLI::PositiveNumber);
  c_eval->add_option("--count", ea.count)->check(CLI::PositiveNumber);
  c_eval->add_option("--seed", ea.seed);
  c_eval->add_option("--format", ea.format)->check(CLI::IsMember({"text", "json"}));
  add_manifest(c_eval);

  CheckArgs ca;
  auto* c_check = app.add_subcommand("check", "Report geometric constraint violations");
  c_check->add_option("--model", ca.model)->required();
  c_check->add_option("--level", ca.level)->check(CLI::IsMember({"none", "antisym", "additive"}));
  c_check->add_option("--tol", ca.tol);
  c_check->add_option("--format", ca.format)->check(CLI::IsMember({"text", "json"}));
  add_manifest(c_check);

  RenderArgs ra;
  auto* c_render = app.add_subcommand("render", "Draw a model as an SVG map");
  c_render->add_option("--model", ra.model)->required();
  c_render->add_option("--out", ra.out)->required();
  c_render->add_option("--dashed-threshold", ra.dashed);
  add_manifest(c_render);

  fs::path replay_path;
  auto* c_replay = app.add_subcommand("replay", "Re-run a command from its manifest and compare");
  c_replay->add_option("manifest", replay_path)->required();

  const std::vector<std::string> given = args;
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, s.out, s.out);
    return code == 0 ? 0 : kExitInput;
  }

  if (*c_replay) return replay(replay_path, s);

  const auto sub = app.get_subcommands().front();
  s.manifest["command"] = sub->get_name();
  std::optional<std::uint64_t> seed_flag;
  fs::path default_manifest;
  if (*c_ml) default_manifest = ml.out;
  if (*c_sim) seed_flag = sa.seed, default_manifest = sa.out;
  if (*c_init) default_manifest = ia.out;
  if (*c_learn) seed_flag = la.seed, default_manifest = la.out;
  if (*c_eval) seed_flag = ea.seed;
  if (*c_render) default_manifest = ra.out;

  // The replayable argv always carries the resolved seed.
  s.argv = given;
  std::uint64_t seed = 0;
  if (*c_sim || *c_learn || *c_eval) {
    seed = resolve_seed(seed_flag);
    s.manifest["seed"] = seed;
    if (!seed_flag) s.argv.push_back("--seed=" + std::to_string(seed));
  }
  s.manifest_path = !manifest_flag.empty()       ? fs::path(manifest_flag)
                    : !default_manifest.empty() ? fs::path(default_manifest.string() + ".manifest.json")
                                                : fs::path(sub->get_name() + ".manifest.json");

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  std::string error;
  try {
    if (*c_ml) cmd_make_loop(ml, s);
    if (*c_sim) cmd_simulate(sa, s, seed);
    if (*c_init) cmd_init(ia, s);
    if (*c_learn) cmd_learn(la, s, seed);
    if (*c_eval) cmd_eval_kl(ea, s, seed);
    if (*c_check) cmd_check(ca, s);
    if (*c_render) cmd_render(ra, s);
  } catch (const CheckFailed& e) {
    code = kExitCheck;
    error = e.what();
  } catch (const ImpossibleSequence& e) {
    code = kExitImpossible;
    error = e.what();
  } catch (const InputError& e) {
    code = kExitInput;
    error = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    code = kExitInput;
    error = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (s.write_manifest) {
    json m = {{"format", "geohmm-manifest"},
              {"command", s.manifest["command"]},
              {"argv", s.argv},
              {"working_directory", fs::current_path().string()}};
    for (const char* key : {"seed", "config", "inputs", "outputs", "summary"}) {
      if (s.manifest.contains(key)) m[key] = s.manifest[key];
    }
    m["stdout_hash"] = content_hash(s.out.str());
    m["exit_code"] = code;
    if (!error.empty()) m["error"] = error;
    m["wall_seconds"] = seconds;
    write_text_file_atomic(s.manifest_path, m.dump(1) + "\n");
  }
  if (!error.empty()) throw std::system_error(code, std::generic_category(), error);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Session s;
  int code = 0;
  try {
    code = run(std::vector<std::string>(argv + 1, argv + argc), s);
  } catch (const std::system_error& e) {
    // Raised after the manifest was written; the code is the exit status.
    std::cout << s.out.str();
    std::cerr << "geohmm: error: " << e.code().message() << "\n";
    return e.code().value();
  } catch (const ImpossibleSequence& e) {
    code = kExitImpossible;
    std::cerr << "geohmm: error: " << e.what() << "\n";
  } catch (const InputError& e) {
    code = kExitInput;
    std::cerr << "geohmm: error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = kExitOther;
    std::cerr << "geohmm: error: " << e.what() << "\n";
  }
  std::cout << s.out.str();
  return code;
}
