#include "fptx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "fptx/errbounds.hpp"
#include "fptx/error.hpp"

namespace fptx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Mat normal_mat(CounterRng& rng, std::size_t r, std::size_t c, double mean, double sd) {
  Mat m(r, c);
  for (auto& v : m.data()) v = rng.normal(mean, sd);
  return m;
}

Mat scale_columns(const Mat& m, const Vec& s) {
  Mat out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= s[j];
  return out;
}

struct Key {
  std::size_t prec;
  Placement placement;
  std::string grid_name;
  double grid_value;
  std::size_t layer;
};

struct RepSamples {
  std::vector<double> cw, nw, bound;
};

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i)
    g.push_back(std::pow(10.0, lo + (hi - lo) * i / static_cast<double>(points - 1)));
  return g;
}

// Per-layer errors of a deep run; layers after a failure are +inf.
void deep_errors(const TransformerConfig& cfg, const Mat& X, const PrecisionSpec& p,
                 std::vector<ErrorMeasurement>& out) {
  const Arith low(p);
  const Arith ref(PrecisionSpec::native());
  out.assign(cfg.depth(), {kInf, kInf});
  Mat a = X, b = X;
  for (std::size_t l = 0; l < cfg.depth(); ++l) {
    try {
      a = transformer_block(cfg, l, a, low);
      b = transformer_block(cfg, l, b, ref);
    } catch (const Error&) {
      return;
    }
    out[l] = compare(a, b);
  }
}

std::size_t max_depth(const ExperimentSpec& s) {
  return s.kind == ExperimentKind::WkWqScaling ? *std::max_element(s.depths.begin(), s.depths.end())
                                               : s.layers;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::DepthSweep:
      return "fig1";
    case ExperimentKind::WkWqScaling:
      return "fig2";
    case ExperimentKind::AttentionInputScaling:
      return "fig3";
    case ExperimentKind::NormalizationPlacement:
      return "fig4";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& s) {
  if (s == "fig1" || s == "depth_sweep") return ExperimentKind::DepthSweep;
  if (s == "fig2" || s == "wkwq_scaling") return ExperimentKind::WkWqScaling;
  if (s == "fig3" || s == "attention_input_scaling") return ExperimentKind::AttentionInputScaling;
  if (s == "fig4" || s == "normalization_placement") return ExperimentKind::NormalizationPlacement;
  throw PreconditionError("unknown experiment '" + s + "'");
}

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.precisions = {PrecisionSpec::decimal(4), PrecisionSpec::decimal(6), PrecisionSpec::decimal(8)};
  switch (kind) {
    case ExperimentKind::DepthSweep:
      s.reps = 200;
      s.layers = 40;
      break;
    case ExperimentKind::WkWqScaling:
      s.reps = 100;
      s.precisions = {PrecisionSpec::decimal(6)};
      s.depths = {10, 20};
      s.grid = log_grid(0.0, 1.0, 6);
      break;
    case ExperimentKind::AttentionInputScaling:
      s.reps = 100;
      s.d = s.n = s.D = 10;
      s.layers = 1;
      s.grid = log_grid(0.0, 3.0, 7);
      break;
    case ExperimentKind::NormalizationPlacement:
      s.reps = 100;
      s.d = s.n = s.D = 10;
      s.layers = 20;
      s.placements = {Placement::PreAttention, Placement::PostAttention};
      break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (reps < 1) throw PreconditionError("reps must be at least 1");
  if (precisions.empty()) throw PreconditionError("at least one precision is required");
  if (d < 2 || n < 1 || D < 1) throw PreconditionError("need d >= 2, n >= 1, D >= 1");
  if (threads < 0) throw PreconditionError("threads must be nonnegative");
  for (const auto& p : precisions)
    if (p.mode == PrecisionMode::Native)
      throw PreconditionError("experiments compare against double; pick a coarser precision");
  switch (kind) {
    case ExperimentKind::DepthSweep:
    case ExperimentKind::NormalizationPlacement:
      if (layers < 1) throw PreconditionError("layers must be at least 1");
      if (kind == ExperimentKind::NormalizationPlacement && placements.empty())
        throw PreconditionError("at least one placement is required");
      break;
    case ExperimentKind::WkWqScaling:
      if (depths.empty() || grid.empty()) throw PreconditionError("fig2 needs depths and a lambda grid");
      for (auto L : depths)
        if (L < 1) throw PreconditionError("depths must be positive");
      break;
    case ExperimentKind::AttentionInputScaling:
      if (grid.empty()) throw PreconditionError("fig3 needs a scale grid");
      break;
  }
  for (double g : grid)
    if (!(g > 0.0) || !std::isfinite(g)) throw PreconditionError("grid values must be positive");
}

Instance gen_instance(ExperimentKind kind, const ExperimentSpec& spec, CounterRng& rng) {
  const std::size_t d = spec.d, n = spec.n, D = spec.D;
  Instance inst;
  inst.cfg.d = d;
  inst.cfg.D = D;
  inst.cfg.variant = spec.variant;
  inst.cfg.softmax = spec.softmax;
  BlockWeights w;
  switch (kind) {
    case ExperimentKind::DepthSweep:
    case ExperimentKind::WkWqScaling: {
      w.Wq = normal_mat(rng, d, d, 0.0, 1.0);
      w.Wk = normal_mat(rng, d, d, 0.0, 1.0);
      w.Wv = normal_mat(rng, d, d, 0.0, 1.0);
      const double sd = std::pow(static_cast<double>(d), -0.25);
      w.A1 = normal_mat(rng, D, d, 0.0, sd);
      w.A2 = normal_mat(rng, d, D, 0.0, sd);
      Vec d1(d), d2(d);
      for (auto& v : d1) v = rng.uniform(0.25, 4.0);
      for (auto& v : d2) v = rng.uniform(0.25, 4.0);
      w.Wk = scale_columns(w.Wk, d1);
      w.Wq = scale_columns(w.Wq, d2);
      inst.X = normal_mat(rng, d, n, 0.0, 1.0);
      break;
    }
    case ExperimentKind::AttentionInputScaling: {
      w.Wq = w.Wk = w.Wv = Mat::identity(d);
      w.A1 = Mat(D, d);
      w.A2 = Mat(d, D);
      inst.X = normal_mat(rng, d, n, 1.0, 0.1);
      break;
    }
    case ExperimentKind::NormalizationPlacement: {
      const double sd = std::sqrt(0.1);
      w.Wq = normal_mat(rng, d, d, 0.0, sd);
      w.Wk = normal_mat(rng, d, d, 0.0, sd);
      w.Wv = normal_mat(rng, d, d, 0.0, sd);
      w.A1 = normal_mat(rng, D, d, 0.0, sd);
      w.A2 = normal_mat(rng, d, D, 0.0, sd);
      inst.X = normal_mat(rng, d, n, 0.0, 1.0);
      break;
    }
  }
  w.b1 = Vec(D, 0.0);
  w.b2 = Vec(d, 0.0);
  const std::size_t L = kind == ExperimentKind::AttentionInputScaling ? 1 : max_depth(spec);
  inst.cfg.layers.assign(L, w);
  inst.cfg.validate();
  return inst;
}

std::vector<const ResultRecord*> ResultTable::select(const PrecisionSpec& p) const {
  std::vector<const ResultRecord*> out;
  for (const auto& r : records)
    if (r.precision == p) out.push_back(&r);
  return out;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Key> keys;
  const auto P = spec.precisions.size();
  for (std::size_t p = 0; p < P; ++p) {
    switch (spec.kind) {
      case ExperimentKind::DepthSweep:
        for (std::size_t l = 1; l <= spec.layers; ++l)
          keys.push_back({p, Placement::PreAttention, "depth", static_cast<double>(spec.layers), l});
        break;
      case ExperimentKind::WkWqScaling:
        for (double g : spec.grid)
          for (auto L : spec.depths) keys.push_back({p, Placement::PreAttention, "lambda", g, L});
        break;
      case ExperimentKind::AttentionInputScaling:
        for (double g : spec.grid) keys.push_back({p, Placement::PreAttention, "scale", g, 1});
        break;
      case ExperimentKind::NormalizationPlacement:
        for (auto pl : spec.placements)
          for (std::size_t l = 1; l <= spec.layers; ++l)
            keys.push_back({p, pl, "depth", static_cast<double>(spec.layers), l});
        break;
    }
  }

  auto run_rep = [&spec, &keys, P](int rep) {
    RepSamples out;
    out.cw.assign(keys.size(), kInf);
    out.nw.assign(keys.size(), kInf);
    out.bound.assign(keys.size(), kNaN);
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(rep));
    const Instance inst = gen_instance(spec.kind, spec, rng);
    std::size_t k = 0;
    std::vector<ErrorMeasurement> errs;
    for (std::size_t p = 0; p < P; ++p) {
      const PrecisionSpec& prec = spec.precisions[p];
      switch (spec.kind) {
        case ExperimentKind::DepthSweep: {
          const auto cfg = quantize(inst.cfg, prec);
          const auto X = quantize(inst.X, prec);
          deep_errors(cfg, X, prec, errs);
          DeepBoundProfile prof;
          if (spec.bounds) {
            try {
              prof = bound_deep_profile(cfg, X, prec.unit_roundoff());
            } catch (const Error&) {
              prof = {};
            }
          }
          for (std::size_t l = 0; l < spec.layers; ++l, ++k) {
            out.cw[k] = errs[l].componentwise;
            out.nw[k] = errs[l].normwise;
            if (l < prof.bound.size() && prof.hypotheses_hold[l]) out.bound[k] = prof.bound[l];
          }
          break;
        }
        case ExperimentKind::WkWqScaling: {
          for (double g : spec.grid) {
            auto cfg = inst.cfg;
            for (auto& w : cfg.layers) w.Wq = scale(w.Wq, g);
            cfg = quantize(cfg, prec);
            deep_errors(cfg, quantize(inst.X, prec), prec, errs);
            for (auto L : spec.depths) {
              out.cw[k] = errs[L - 1].componentwise;
              out.nw[k] = errs[L - 1].normwise;
              ++k;
            }
          }
          break;
        }
        case ExperimentKind::AttentionInputScaling: {
          const auto w = quantize(inst.cfg.layers[0], prec);
          for (double g : spec.grid) {
            const Mat X = quantize(scale(inst.X, g), prec);
            try {
              const auto e = compare(self_attention(w, X, Arith(prec), spec.softmax),
                                     self_attention(w, X, Arith(PrecisionSpec::native()), spec.softmax));
              out.cw[k] = e.componentwise;
              out.nw[k] = e.normwise;
            } catch (const Error&) {
            }
            ++k;
          }
          break;
        }
        case ExperimentKind::NormalizationPlacement: {
          for (auto pl : spec.placements) {
            auto cfg = inst.cfg;
            cfg.placement = pl;
            cfg = quantize(cfg, prec);
            deep_errors(cfg, quantize(inst.X, prec), prec, errs);
            for (std::size_t l = 0; l < spec.layers; ++l, ++k) {
              out.cw[k] = errs[l].componentwise;
              out.nw[k] = errs[l].normwise;
            }
          }
          break;
        }
      }
    }
    return out;
  };

  std::vector<RepSamples> reps(static_cast<std::size_t>(spec.reps));
  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(spec.reps));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < spec.reps; r = next++) reps[static_cast<std::size_t>(r)] = run_rep(r);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ResultTable table;
  table.spec = spec;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::vector<double> cw, nw;
    double bsum = 0.0;
    std::size_t bcount = 0;
    for (const auto& r : reps) {
      cw.push_back(r.cw[k]);
      nw.push_back(r.nw[k]);
      if (std::isfinite(r.bound[k])) {
        bsum += r.bound[k];
        ++bcount;
      }
    }
    ResultRecord rec;
    rec.precision = spec.precisions[keys[k].prec];
    rec.placement = keys[k].placement;
    rec.grid_name = keys[k].grid_name;
    rec.grid_value = keys[k].grid_value;
    rec.layer = keys[k].layer;
    rec.cw = summarize(cw);
    rec.nw = summarize(nw);
    rec.bound_count = bcount;
    rec.bound_mean = bcount ? bsum / static_cast<double>(bcount) : kNaN;
    table.records.push_back(std::move(rec));
  }
  return table;
}

}  // namespace fptx
