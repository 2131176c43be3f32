#include "geohmm/pipeline.hpp"

#include "geohmm/errors.hpp"
#include "geohmm/simgen.hpp"

namespace geohmm {

GeoHmm starting_model(const ExperienceSequence& e, std::span<const std::size_t> dims,
                      const PipelineConfig& cfg, Rng& rng) {
  if (cfg.initial) {
    if (cfg.initial->n_states() != cfg.n_states) {
      throw InputError("initial model has " + std::to_string(cfg.initial->n_states()) +
                       " states, expected " + std::to_string(cfg.n_states));
    }
    return perturb_model(*cfg.initial, cfg.init_jitter, rng);
  }
  if (!cfg.learn.use_odometry) return random_model(cfg.n_states, dims, cfg.learn.mode, rng);
  const auto base = init_model(e, cfg.n_states, dims, cfg.buckets, cfg.learn.mode);
  return perturb_model(base, cfg.init_jitter, rng);
}

PipelineResult learn_restarts(const ExperienceSequence& e, std::span<const std::size_t> dims,
                              const PipelineConfig& cfg) {
  if (cfg.restarts < 1) throw InputError("at least one restart is required");
  if (cfg.n_states < 1) throw InputError("at least one state is required");
  PipelineResult out;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RestartOutcome run;
    run.seed = Rng::derive_seed(cfg.seed, r);
    Rng rng(run.seed);
    const auto start = starting_model(e, dims, cfg, rng);
    run.result = em_learn(e, start, cfg.learn);
    out.runs.push_back(std::move(run));
    if (out.runs.back().final_loglik() > out.runs[out.best].final_loglik()) out.best = r;
  }
  return out;
}

}  // namespace geohmm
