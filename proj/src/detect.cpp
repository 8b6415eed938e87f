#include "rmteed/detect.hpp"

#include "rmteed/error.hpp"
#include "rmteed/random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace rmteed {

namespace {

const char* kModule = "detect";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, kModule, msg); }

constexpr std::uint64_t kMonteCarloTag = 0x4d43u;
constexpr std::uint64_t kJitterTag = 0x4a49u;

Eigen::Index parse_index(const std::string& s, const std::string& what) {
  Eigen::Index v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorKind::Configuration, "bad " + what + " '" + s + "'");
  }
  return v;
}

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  std::size_t workers = jobs <= 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<std::size_t>(jobs);
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t rows_tag(const std::vector<Eigen::Index>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto r : rows) h = splitmix64(h ^ static_cast<std::uint64_t>(r));
  return h;
}

std::vector<TestFunction> resolve(const std::vector<std::string>& names) {
  std::vector<TestFunction> fns;
  for (const auto& n : names) fns.push_back(TestFunction::by_name(n));
  return fns;
}

struct Mean {
  double mean = 0.0;
  double stddev = 0.0;
};

Mean mean_std(const std::vector<double>& v) {
  Mean m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return m;
}

using ReferenceCache = std::map<Eigen::Index, std::vector<ReferenceMoments>>;

struct SweepContext {
  const DataSource& src;
  const DetectorConfig& cfg;
  std::vector<TestFunction> fns;
  std::vector<Eigen::Index> ends;
  ReferenceCache cache;
  IndicatorSeries out;
};

std::vector<Eigen::Index> window_ends(const DataSource& src, const DetectorConfig& cfg) {
  const Eigen::Index T = cfg.window.length;
  if (src.samples() < T) {
    fail(ErrorKind::InsufficientHistory,
         "need at least " + std::to_string(T) + " samples for one window, have " + std::to_string(src.samples()));
  }
  std::vector<Eigen::Index> ends;
  for (Eigen::Index e = T - 1; e < src.samples(); e += cfg.window.stride) ends.push_back(e);
  return ends;
}

void sweep_rows(SweepContext& ctx, const std::string& region, const std::vector<Eigen::Index>& rows) {
  const auto& cfg = ctx.cfg;
  const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index T = cfg.window.length;
  const int L = cfg.window.depth;
  if (N > T) {
    fail(ErrorKind::AspectRatio, "region '" + region + "' has " + std::to_string(N) + " nodes, more than the window length T=" +
                                     std::to_string(T));
  }

  PipelineOptions popts;
  popts.degenerate = cfg.degenerate;
  popts.les = cfg.les;
  for (auto r : rows) popts.row_labels.push_back(ctx.src.node_ids[static_cast<std::size_t>(r)]);

  const std::uint64_t tag = rows_tag(rows);
  const std::size_t nf = ctx.fns.size();
  const std::size_t nw = ctx.ends.size();
  std::vector<double> taus(nw * nf);
  std::vector<std::optional<WindowSpectra>> captured(nw);

  parallel_for(nw, cfg.jobs, [&](std::size_t w) {
    const Eigen::Index end = ctx.ends[w];
    const Eigen::MatrixXd raw = ctx.src.values(rows, Eigen::seqN(end - T + 1, T));
    const bool capture = std::find(cfg.capture_ends.begin(), cfg.capture_ends.end(), end) != cfg.capture_ends.end();
    WindowSpectra spectra;
    const auto values = window_statistics(raw, ctx.fns, L, derive_seed(cfg.seed, {tag, static_cast<std::uint64_t>(end)}),
                                          popts, capture ? &spectra : nullptr);
    std::copy(values.begin(), values.end(), taus.begin() + static_cast<std::ptrdiff_t>(w * nf));
    if (capture) captured[w] = std::move(spectra);
  });

  for (std::size_t w = 0; w < nw; ++w) {
    if (!captured[w]) continue;
    if (captured[w]->ring) ctx.out.spectra.push_back({region, ctx.ends[w], *captured[w]->ring});
    if (captured[w]->covariance) ctx.out.spectra.push_back({region, ctx.ends[w], *captured[w]->covariance});
  }

  const bool calibration = cfg.reference.mode == ReferenceSpec::Mode::Calibration;
  auto in_calibration = [&](Eigen::Index e) {
    return calibration && e >= cfg.reference.calib_first && e <= cfg.reference.calib_last;
  };

  std::vector<ReferenceMoments> refs;
  if (calibration) {
    for (std::size_t f = 0; f < nf; ++f) {
      std::vector<double> sample;
      for (std::size_t w = 0; w < nw; ++w) {
        if (in_calibration(ctx.ends[w])) sample.push_back(taus[w * nf + f]);
      }
      if (sample.size() < 2) {
        fail(ErrorKind::Configuration, "calibration range " + cfg.reference.describe() + " holds fewer than 2 windows");
      }
      const auto m = mean_std(sample);
      ReferenceMoments r;
      r.mean = m.mean;
      r.stddev = m.stddev;
      r.source = "calibration:" + std::to_string(cfg.reference.calib_first) + ":" + std::to_string(cfg.reference.calib_last);
      refs.push_back(r);
    }
  } else {
    auto it = ctx.cache.find(N);
    if (it == ctx.cache.end()) {
      it = ctx.cache.emplace(N, monte_carlo_reference(ctx.fns, N, T, L, cfg.mc_draws, cfg.seed, cfg.les)).first;
    }
    refs = it->second;
  }

  for (std::size_t f = 0; f < nf; ++f) {
    Series s;
    s.region = region;
    s.function = ctx.fns[f].label;
    s.nodes = N;
    s.reference = refs[f];
    s.reference.expectation = limiting_expectation(ctx.fns[f], N, T, L);
    s.convention = ctx.fns[f].domain == FunctionDomain::ComplexModulus ? "ring L=" + std::to_string(L) : "M=XX^H/N";
    const double k = cfg.threshold_k;
    for (std::size_t w = 0; w < nw; ++w) {
      const Eigen::Index end = ctx.ends[w];
      if (in_calibration(end)) continue;
      IndicatorPoint p;
      p.t = end;
      p.tau = taus[w * nf + f];
      p.eta = s.reference.expectation ? p.tau / *s.reference.expectation : std::numeric_limits<double>::quiet_NaN();
      const double dev = std::abs(p.tau - s.reference.mean);
      p.flag = s.reference.stddev > 0.0 ? dev > k * s.reference.stddev : dev > 0.0;
      s.points.push_back(p);
    }
    ctx.out.series.push_back(std::move(s));
  }
}

std::vector<Eigen::Index> base_rows(const DataSource& src, const DetectorConfig& cfg) {
  std::vector<Eigen::Index> rows;
  if (cfg.window.node_subset) {
    for (const auto& id : *cfg.window.node_subset) {
      auto r = src.index_of(id);
      if (!r) fail(ErrorKind::Contract, "unknown node '" + id + "' in node subset");
      rows.push_back(*r);
    }
  } else {
    for (Eigen::Index i = 0; i < src.nodes(); ++i) rows.push_back(i);
  }
  if (rows.size() < 2) fail(ErrorKind::Contract, "a window needs at least 2 nodes");
  return rows;
}

SweepContext make_context(const DataSource& src, const DetectorConfig& cfg) {
  cfg.validate();
  SweepContext ctx{src, cfg, resolve(cfg.functions), window_ends(src, cfg), {}, {}};
  ctx.out.T = cfg.window.length;
  ctx.out.L = cfg.window.depth;
  ctx.out.threshold_k = cfg.threshold_k;
  return ctx;
}

}  // namespace

std::string ReferenceSpec::describe() const {
  if (mode == Mode::Theoretical) return "theoretical";
  return "calib:" + std::to_string(calib_first) + ":" + std::to_string(calib_last);
}

ReferenceSpec parse_reference(const std::string& text) {
  ReferenceSpec r;
  if (text == "theoretical") return r;
  if (text.rfind("calib:", 0) == 0) {
    const auto rest = text.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Configuration, "calibration reference must read calib:START:END");
    r.mode = ReferenceSpec::Mode::Calibration;
    r.calib_first = parse_index(rest.substr(0, colon), "calibration start");
    r.calib_last = parse_index(rest.substr(colon + 1), "calibration end");
    if (r.calib_first > r.calib_last) fail(ErrorKind::Configuration, "calibration start after end in '" + text + "'");
    return r;
  }
  fail(ErrorKind::Configuration, "reference must be 'theoretical' or 'calib:START:END', got '" + text + "'");
}

void DetectorConfig::validate() const {
  if (!(threshold_k > 0.0)) fail(ErrorKind::Configuration, "threshold k must be positive");
  if (window.length < 2) fail(ErrorKind::Configuration, "window length T must be >= 2");
  if (window.stride < 1) fail(ErrorKind::Configuration, "window stride must be >= 1");
  if (window.depth < 1) fail(ErrorKind::Configuration, "ring depth L must be >= 1");
  if (functions.empty()) fail(ErrorKind::Configuration, "no test functions requested");
  if (reference.mode == ReferenceSpec::Mode::Theoretical && mc_draws < 2) {
    fail(ErrorKind::Configuration, "Monte Carlo reference needs at least 2 draws");
  }
  if (gap_tolerance < 0 || min_duration < 1) fail(ErrorKind::Configuration, "gap tolerance >= 0 and min duration >= 1 required");
}

double Series::sigma_units(const IndicatorPoint& p) const {
  return reference.stddev > 0.0 ? (p.tau - reference.mean) / reference.stddev : 0.0;
}

const Series* IndicatorSeries::find(const std::string& region, const std::string& function) const {
  for (const auto& s : series) {
    if (s.region == region && s.function == function) return &s;
  }
  return nullptr;
}

std::vector<double> window_statistics(const Eigen::MatrixXd& raw, const std::vector<TestFunction>& fns, int L,
                                      std::uint64_t seed, const PipelineOptions& opts, WindowSpectra* spectra) {
  StandardizeOptions so;
  so.policy = opts.degenerate;
  so.seed = derive_seed(seed, {kJitterTag});
  so.row_labels = opts.row_labels;
  const auto x = standardize(raw, so);

  const bool need_ring = std::any_of(fns.begin(), fns.end(), [](const TestFunction& f) {
    return f.domain == FunctionDomain::ComplexModulus;
  });
  const bool need_cov = std::any_of(fns.begin(), fns.end(), [](const TestFunction& f) {
    return f.domain != FunctionDomain::ComplexModulus;
  });

  std::optional<SpectrumSet> ring;
  std::optional<SpectrumSet> cov;
  if (need_ring) {
    const std::vector<StandardizedMatrix> factors(static_cast<std::size_t>(L), x);
    const auto product = ring_product(factors, seed);
    ring = eigen_general(product.z, SpectrumKind::Ring, "ring product");
    ring->T = x.cols();
    ring->L = L;
  }
  if (need_cov) cov = eigen_hermitian(covariance(x, CovarianceConvention::M));

  std::vector<double> out;
  out.reserve(fns.size());
  for (const auto& f : fns) {
    out.push_back(les(f.domain == FunctionDomain::ComplexModulus ? *ring : *cov, f, opts.les).value);
  }
  if (spectra) {
    spectra->ring = std::move(ring);
    spectra->covariance = std::move(cov);
  }
  return out;
}

std::optional<double> limiting_expectation(const TestFunction& f, Eigen::Index N, Eigen::Index T, int L) {
  const double c = static_cast<double>(N) / static_cast<double>(T);
  double e = 0.0;
  try {
    if (f.domain == FunctionDomain::ComplexModulus) {
      e = lln_expectation(f, ReferenceDensity::ring(c, L), N);
    } else {
      e = lln_expectation(f, ReferenceDensity::mp2(c), N);
    }
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::Divergence || err.kind() == ErrorKind::Domain) return std::nullopt;
    throw;
  }
  if (e == 0.0 || !std::isfinite(e)) return std::nullopt;
  return e;
}

std::vector<ReferenceMoments> monte_carlo_reference(const std::vector<TestFunction>& fns, Eigen::Index N,
                                                    Eigen::Index T, int L, int draws, std::uint64_t seed,
                                                    const LesOptions& les) {
  if (draws < 2) fail(ErrorKind::Parameter, "Monte Carlo reference needs at least 2 draws");
  const std::uint64_t base = derive_seed(seed, {kMonteCarloTag, static_cast<std::uint64_t>(N),
                                                static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(L)});
  PipelineOptions popts;
  popts.les = les;
  std::vector<std::vector<double>> samples(fns.size());
  for (int d = 0; d < draws; ++d) {
    Rng rng(derive_seed(base, {static_cast<std::uint64_t>(d), 0}));
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd g(N, T);
    for (Eigen::Index j = 0; j < T; ++j) {
      for (Eigen::Index i = 0; i < N; ++i) g(i, j) = n01(rng);
    }
    const auto values = window_statistics(g, fns, L, derive_seed(base, {static_cast<std::uint64_t>(d), 1}), popts);
    for (std::size_t f = 0; f < fns.size(); ++f) samples[f].push_back(values[f]);
  }
  std::vector<ReferenceMoments> out;
  for (std::size_t f = 0; f < fns.size(); ++f) {
    const auto m = mean_std(samples[f]);
    ReferenceMoments r;
    r.mean = m.mean;
    r.stddev = m.stddev;
    r.source = "monte-carlo:" + std::to_string(draws);
    out.push_back(r);
  }
  return out;
}

IndicatorSeries sweep(const DataSource& src, const DetectorConfig& cfg) {
  auto ctx = make_context(src, cfg);
  sweep_rows(ctx, "ALL", base_rows(src, cfg));
  return std::move(ctx.out);
}

IndicatorSeries regional_series(const DataSource& src, const DetectorConfig& cfg) {
  auto ctx = make_context(src, cfg);
  if (cfg.include_all || !cfg.regions) sweep_rows(ctx, "ALL", base_rows(src, cfg));
  if (!cfg.regions) return std::move(ctx.out);

  for (const auto& [name, members] : cfg.regions->regions) {
    std::vector<Eigen::Index> rows;
    std::size_t absent = 0;
    for (const auto& id : members) {
      if (auto r = src.index_of(id)) {
        rows.push_back(*r);
      } else {
        ++absent;
      }
    }
    if (absent > 0) {
      ctx.out.warnings.push_back("region '" + name + "': " + std::to_string(absent) + " of " +
                                 std::to_string(members.size()) + " nodes absent from the data");
    }
    if (rows.size() < 2) {
      ctx.out.warnings.push_back("region '" + name + "' skipped: fewer than 2 nodes");
      continue;
    }
    sweep_rows(ctx, name, rows);
  }
  return std::move(ctx.out);
}

std::vector<Event> extract_runs(const Series& s, Eigen::Index gap_tolerance, Eigen::Index min_duration) {
  std::vector<Event> events;
  const auto n = static_cast<Eigen::Index>(s.points.size());
  Eigen::Index i = 0;
  while (i < n) {
    if (!s.points[static_cast<std::size_t>(i)].flag) {
      ++i;
      continue;
    }
    const Eigen::Index first = i;
    Eigen::Index last = i;
    Eigen::Index j = i + 1;
    while (j < n) {
      if (s.points[static_cast<std::size_t>(j)].flag) {
        last = j;
      } else if (j - last > gap_tolerance) {
        break;
      }
      ++j;
    }
    if (last - first + 1 >= min_duration) {
      Event e;
      e.region = s.region;
      e.function = s.function;
      e.start_t = s.points[static_cast<std::size_t>(first)].t;
      e.end_t = s.points[static_cast<std::size_t>(last)].t;
      for (Eigen::Index k = first; k <= last; ++k) {
        const auto& p = s.points[static_cast<std::size_t>(k)];
        if (!p.flag) continue;
        ++e.flagged;
        const double z = s.sigma_units(p);
        if (std::abs(z) > std::abs(e.peak_sigma)) e.peak_sigma = z;
      }
      const auto& any = s.points[static_cast<std::size_t>(first)];
      const double sign = e.peak_sigma != 0.0 ? e.peak_sigma : any.tau - s.reference.mean;
      e.direction = sign > 0.0 ? 1 : (sign < 0.0 ? -1 : 0);
      events.push_back(e);
    }
    i = last + 1;
  }
  return events;
}

EventReport extract_events(const IndicatorSeries& series, const DetectorConfig& cfg) {
  EventReport report;
  report.T = series.T;
  report.L = series.L;
  report.threshold_k = series.threshold_k;
  report.gap_tolerance = cfg.gap_tolerance;
  report.min_duration = cfg.min_duration;
  for (const auto& s : series.series) {
    auto runs = extract_runs(s, cfg.gap_tolerance, cfg.min_duration);
    report.events.insert(report.events.end(), runs.begin(), runs.end());
  }
  return report;
}

}  // namespace rmteed
