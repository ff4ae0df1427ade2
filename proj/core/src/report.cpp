#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fptx/error.hpp"
#include "fptx/harness.hpp"

namespace fptx {

namespace {

const char* kHeader =
    "experiment,seed,rep_count,precision_mode,precision_value,variant,placement,grid_name,"
    "grid_value,layer,metric,stat,value,count_inf";

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw PreconditionError("bad number '" + s + "'");
  return v;
}

std::string prefix(const ResultTable& t, const ResultRecord& r) {
  std::ostringstream os;
  os << to_string(t.spec.kind) << ',' << t.spec.seed << ',' << t.spec.reps << ','
     << r.precision.mode_name() << ',' << r.precision.value << ',' << to_string(t.spec.variant) << ','
     << to_string(r.placement) << ',' << r.grid_name << ',' << num(r.grid_value) << ',' << r.layer;
  return os.str();
}

}  // namespace

void write_csv(const ResultTable& t, std::ostream& os) {
  os << kHeader << '\n';
  for (const auto& r : t.records) {
    const std::string p = prefix(t, r);
    for (const auto& [metric, st] : {std::pair<const char*, const ErrorStats*>{"cw", &r.cw}, {"nw", &r.nw}}) {
      const std::pair<const char*, double> stats[] = {
          {"mean", st->mean}, {"median", st->median}, {"p5", st->p5}, {"p95", st->p95}, {"std", st->std}};
      for (const auto& [name, v] : stats)
        os << p << ',' << metric << ',' << name << ',' << num(v) << ',' << st->count_inf << '\n';
    }
    if (r.bound_count > 0)
      os << p << ",cw,bound_mean," << num(r.bound_mean) << ',' << (t.spec.reps - r.bound_count) << '\n';
  }
}

void write_histogram_csv(const ResultTable& t, std::ostream& os) {
  os << "experiment,seed,precision_mode,precision_value,placement,grid_name,grid_value,layer,"
        "bin,log10_lo,log10_hi,count,zeros\n";
  for (const auto& r : t.records) {
    const auto& h = r.cw.histogram;
    const double w = (h.log10_hi - h.log10_lo) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      os << to_string(t.spec.kind) << ',' << t.spec.seed << ',' << r.precision.mode_name() << ','
         << r.precision.value << ',' << to_string(r.placement) << ',' << r.grid_name << ','
         << num(r.grid_value) << ',' << r.layer << ',' << b << ',' << num(h.log10_lo + w * b) << ','
         << num(b + 1 == h.counts.size() ? h.log10_hi : h.log10_lo + w * (b + 1)) << ',' << h.counts[b]
         << ',' << h.zeros << '\n';
    }
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::vector<CsvRow> rows;
  std::string line;
  if (!std::getline(is, line)) return rows;
  if (line != kHeader) throw PreconditionError("unexpected CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 14) throw PreconditionError("expected 14 fields: " + line);
    CsvRow r;
    r.experiment = f[0];
    r.seed = std::stoull(f[1]);
    r.rep_count = std::stoi(f[2]);
    r.precision_mode = f[3];
    r.precision_value = std::stoi(f[4]);
    r.variant = f[5];
    r.placement = f[6];
    r.grid_name = f[7];
    r.grid_value = parse_num(f[8]);
    r.layer = std::stoull(f[9]);
    r.metric = f[10];
    r.stat = f[11];
    r.value = parse_num(f[12]);
    r.count_inf = std::stoull(f[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fptx
