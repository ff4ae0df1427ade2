#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fptx/conditioning.hpp"
#include "fptx/errbounds.hpp"
#include "fptx/error.hpp"
#include "fptx/harness.hpp"
#include "fptx/jacobians.hpp"
#include "fptx/sampling.hpp"

using namespace fptx;

namespace {

const std::vector<LayerKind> kAllKinds = {
    LayerKind::Centring,  LayerKind::RMSNorm, LayerKind::LayerNorm, LayerKind::Affine,    LayerKind::Perceptron,
    LayerKind::SimScores, LayerKind::Softmax, LayerKind::Attention, LayerKind::MatMulPair};

struct Dims {
  std::size_t d = 6, n = 5, D = 8, layers = 3;
  std::uint64_t seed = 1;
  int trials = 200;
};

double rel_frob(const Mat& a, const Mat& b) {
  const double nb = frobenius(b);
  return frobenius(sub(a, b)) / (nb > 0 ? nb : 1.0);
}

int cmd_check_jacobians(const Dims& dm) {
  int failures = 0;
  std::printf("%-10s %8s %8s %12s\n", "layer", "trials", "skipped", "max_rel_err");
  for (auto kind : kAllKinds) {
    double worst = 0.0;
    int done = 0, skipped = 0;
    CounterRng rng(dm.seed, static_cast<std::uint64_t>(kind));
    while (done < dm.trials) {
      const auto pt = random_layer_point(kind, rng, dm.d, dm.n, dm.D);
      try {
        worst = std::max(worst, rel_frob(analytic_jacobian(pt), finite_difference_jacobian(pt)));
        ++done;
      } catch (const KinkCrossingError&) {
        ++skipped;
      } catch (const DegenerateInputError&) {
        ++skipped;
      }
    }
    std::printf("%-10s %8d %8d %12.3e\n", to_string(kind).c_str(), done, skipped, worst);
    if (!(worst <= 1e-5)) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_condition(const std::string& layer, const Dims& dm) {
  const auto kind = parse_layer_kind(layer);
  CounterRng rng(dm.seed, 0);
  const auto pt = random_layer_point(kind, rng, dm.d, dm.n, dm.D);
  std::printf("%-14s %14s %14s %s\n", "kind", "generic", "closed_form", "exact");
  for (auto ck : {CondKind::Normwise, CondKind::Mixed, CondKind::Componentwise}) {
    const double g = condition_generic(pt, ck);
    const auto cf = condition_closed_form(pt, ck);
    if (cf)
      std::printf("%-14s %14.6e %14.6e %s\n", to_string(ck).c_str(), g, cf->value, cf->exact ? "yes" : "bound");
    else
      std::printf("%-14s %14.6e %14s %s\n", to_string(ck).c_str(), g, "-", "-");
  }
  return 0;
}

void print_bound(const BoundResult& b, double measured) {
  std::printf("bound      %.6e\nmeasured   %.6e\nratio      %.4f\n", b.first_order_bound, measured,
              measured / b.first_order_bound);
  for (const auto& [k, v] : b.ingredients) std::printf("  %-22s %.6e\n", k.c_str(), v);
  for (const auto& h : b.hypotheses)
    std::printf("  [%s] %s %s\n", h.holds ? "ok" : "FAILS", h.name.c_str(), h.detail.c_str());
}

int cmd_bound(const std::string& what, const Dims& dm, const PrecisionSpec& p, NormVariant v) {
  CounterRng rng(dm.seed, 0);
  const double u = p.unit_roundoff();
  if (what == "block" || what == "deep") {
    const std::size_t L = what == "block" ? 1 : dm.layers;
    auto cfg = quantize(random_config(rng, dm.d, dm.D, L, v, 0.5), p);
    const Mat X = quantize(random_matrix(rng, dm.d, dm.n), p);
    const auto lo = deep_transformer(cfg, X, Arith(p));
    const auto hi = deep_transformer(cfg, X, Arith(PrecisionSpec::native()));
    const auto b = what == "block" ? bound_block(cfg, 0, X, u) : bound_deep(cfg, X, u);
    print_bound(b, compare(lo.back(), hi.back()).componentwise);
    return 0;
  }
  const auto kind = parse_layer_kind(what);
  auto pt = random_layer_point(kind, rng, dm.d, dm.n, dm.D);
  pt.input = quantize(pt.input, p);
  pt.weights = quantize(pt.weights, p);
  const auto b = bound_layer_fresh(pt, u);
  const auto e = measure_error([&pt](const Mat& in, const Arith& ar) { return evaluate_layer(pt, in, ar); },
                               pt.input, p);
  print_bound(b, e.componentwise);
  return 0;
}

int cmd_selftest() {
  int bad = 0;
  auto check = [&bad](bool ok, const char* what) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", what);
    if (!ok) ++bad;
  };
  check(round_binary(1.0 / 3.0, 24) == static_cast<double>(1.0f / 3.0f), "binary(24) matches float");
  check(round_decimal(2.0 / 3.0, 4) == 0.6667, "decimal(4) of 2/3");
  const auto ph = CounterRng::philox({0, 0, 0, 0}, {0, 0});
  check(ph[0] == 0x6627e8d5u && ph[3] == 0x9b00dbd8u, "philox known answer");
  Dims dm;
  dm.trials = 5;
  check(cmd_check_jacobians(dm) == 0, "analytic Jacobians match finite differences");
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rounding-error analysis of transformer forward passes"};
  app.require_subcommand(1);
  Dims dm;
  std::vector<std::string> precisions;
  std::string variant = "ln";
  std::string config, out, hist;
  std::uint64_t seed = 0;
  int reps = 0, threads = -1;
  bool bounds = false;

  auto add_dims = [&dm](CLI::App* c) {
    c->add_option("--dim-d", dm.d, "Embedding dimension");
    c->add_option("--dim-n", dm.n, "Sequence length");
    c->add_option("--dim-D", dm.D, "Hidden width of the perceptron");
    c->add_option("--seed", dm.seed, "Random seed");
  };

  auto* cj = app.add_subcommand("check-jacobians", "Analytic vs finite-difference Jacobians");
  add_dims(cj);
  cj->add_option("--trials", dm.trials, "Instances per layer kind");

  std::string layer;
  auto* cc = app.add_subcommand("condition", "Generic and closed-form condition numbers");
  cc->add_option("layer", layer, "centring|rms|ln|affine|tlp|simscores|softmax|attention|matmul")->required();
  add_dims(cc);

  auto* cb = app.add_subcommand("bound", "First-order error bound on a random instance");
  cb->add_option("what", layer, "A layer name, block or deep")->required();
  add_dims(cb);
  cb->add_option("--layers", dm.layers, "Depth for 'deep'");
  cb->add_option("--precision", precisions, "d:<digits> or b:<bits>");
  cb->add_option("--variant", variant, "rms|ln");

  std::string fig;
  auto* ce = app.add_subcommand("experiment", "Run one of the four experiments and write CSV");
  ce->add_option("which", fig, "fig1|fig2|fig3|fig4")->required();
  ce->add_option("--config", config, "JSON experiment config");
  ce->add_option("--out", out, "CSV output path (default stdout)");
  ce->add_option("--hist", hist, "Histogram CSV output path");
  ce->add_option("--seed", seed, "Random seed");
  ce->add_option("--reps", reps, "Number of random instances");
  ce->add_option("--precision", precisions, "d:<digits> or b:<bits>, repeatable");
  auto* vopt = ce->add_option("--variant", variant, "rms|ln");
  ce->add_option("--threads", threads, "Worker threads (0: all cores)");
  ce->add_flag("--bounds", bounds, "Also evaluate the deep bound (fig1)");

  auto* cs = app.add_subcommand("selftest", "Quick sanity checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cj->parsed()) return cmd_check_jacobians(dm);
    if (cc->parsed()) return cmd_condition(layer, dm);
    if (cb->parsed()) {
      const auto p = precisions.empty() ? PrecisionSpec::decimal(6) : PrecisionSpec::parse(precisions.front());
      return cmd_bound(layer, dm, p, parse_variant(variant));
    }
    if (cs->parsed()) return cmd_selftest();
    if (ce->parsed()) {
      ExperimentSpec spec =
          config.empty() ? ExperimentSpec::defaults(parse_experiment(fig)) : load_config(config);
      if (!config.empty() && spec.kind != parse_experiment(fig))
        throw PreconditionError("config describes " + to_string(spec.kind) + ", not " + fig);
      if (seed) spec.seed = seed;
      if (reps) spec.reps = reps;
      if (threads >= 0) spec.threads = threads;
      if (bounds) spec.bounds = true;
      if (vopt->count()) spec.variant = parse_variant(variant);
      if (!precisions.empty()) {
        spec.precisions.clear();
        for (const auto& s : precisions) spec.precisions.push_back(PrecisionSpec::parse(s));
      }
      const auto table = run_experiment(spec);
      if (out.empty()) {
        write_csv(table, std::cout);
      } else {
        std::ofstream os(out);
        if (!os) throw PreconditionError("cannot write '" + out + "'");
        write_csv(table, os);
      }
      if (!hist.empty()) {
        std::ofstream hs(hist);
        if (!hs) throw PreconditionError("cannot write '" + hist + "'");
        write_histogram_csv(table, hs);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
