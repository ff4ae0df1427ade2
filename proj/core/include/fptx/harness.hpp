#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fptx/fparith.hpp"
#include "fptx/net.hpp"
#include "fptx/rng.hpp"
#include "fptx/stats.hpp"

namespace fptx {

enum class ExperimentKind {
  DepthSweep,             // fig1
  WkWqScaling,            // fig2
  AttentionInputScaling,  // fig3
  NormalizationPlacement, // fig4
};

std::string to_string(ExperimentKind k);  // "fig1" ... "fig4"
ExperimentKind parse_experiment(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::DepthSweep;
  std::uint64_t seed = 20240601;
  int reps = 200;
  std::vector<PrecisionSpec> precisions;
  NormVariant variant = NormVariant::Layer;
  SoftmaxMode softmax = SoftmaxMode::Shifted;  // unshifted overflows exp in double here
  std::size_t d = 20, n = 20, D = 20;
  std::size_t layers = 40;                 // fig1, fig4
  std::vector<std::size_t> depths;         // fig2
  std::vector<double> grid;                // fig2: lambda, fig3: input scale
  std::vector<Placement> placements;       // fig4
  int threads = 0;                         // 0: hardware concurrency
  bool bounds = false;                     // fig1: per-instance deep bound

  // Defaults for each experiment kind.
  static ExperimentSpec defaults(ExperimentKind kind);
  void validate() const;
};

// Random instance; blocks share one set of weights.
struct Instance {
  TransformerConfig cfg;
  Mat X;
};

// fig1/fig2: W ~ N(0, 1) with W_k, W_q multiplied on the right by diagonal
// matrices with U[1/4, 4] entries; A1, A2 ~ N(0, 1/sqrt d); biases zero;
// X ~ N(0, 1). fig3: identity weights, X ~ N(1, 0.01). fig4: all matrices
// N(0, 0.1), X ~ N(0, 1).
Instance gen_instance(ExperimentKind kind, const ExperimentSpec& spec, CounterRng& rng);

struct ResultRecord {
  PrecisionSpec precision;
  Placement placement = Placement::PreAttention;
  std::string grid_name;
  double grid_value = 0.0;
  std::size_t layer = 0;
  ErrorStats cw;
  ErrorStats nw;
  double bound_mean = 0.0;  // mean deep bound over instances whose hypotheses hold
  std::size_t bound_count = 0;
};

struct ResultTable {
  ExperimentSpec spec;
  std::vector<ResultRecord> records;

  // Records matching a precision (and optionally placement / grid value).
  std::vector<const ResultRecord*> select(const PrecisionSpec& p) const;
};

ResultTable run_experiment(const ExperimentSpec& spec);

// CSV with header
// experiment,seed,rep_count,precision_mode,precision_value,variant,placement,
// grid_name,grid_value,layer,metric,stat,value,count_inf
void write_csv(const ResultTable& t, std::ostream& os);
// Log10 histograms of the componentwise error, one row per bin.
void write_histogram_csv(const ResultTable& t, std::ostream& os);

struct CsvRow {
  std::string experiment;
  std::uint64_t seed = 0;
  int rep_count = 0;
  std::string precision_mode;
  int precision_value = 0;
  std::string variant;
  std::string placement;
  std::string grid_name;
  double grid_value = 0.0;
  std::size_t layer = 0;
  std::string metric;
  std::string stat;
  double value = 0.0;
  std::size_t count_inf = 0;
};

std::vector<CsvRow> read_csv(std::istream& is);

// JSON experiment config; unknown keys are rejected. Fields not present keep
// the defaults of the named experiment.
ExperimentSpec load_config(const std::string& path);
ExperimentSpec parse_config(const std::string& json_text);

}  // namespace fptx
