#include "fasa/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "fasa/csv.hpp"
#include "fasa/metrics.hpp"
#include "fasa/parallel.hpp"
#include "fasa/simulator.hpp"
#include "fasa/traffic.hpp"

#ifndef FASA_BUILD_FINGERPRINT
#define FASA_BUILD_FINGERPRINT "unknown"
#endif

namespace fasa::experiments {

namespace {

using json = nlohmann::json;
using estimators::SchemeParams;

constexpr std::uint64_t kTrialBlock = 256;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

std::string key_path(const std::string& parent, std::string_view key) {
  return parent + "." + std::string(key);
}

std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    return v.get<std::uint64_t>();
  }
  if (v.is_number_integer()) {
    fail(path, "must be >= 0");
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
      return static_cast<std::uint64_t>(d);
    }
  }
  fail(path, "expected a non-negative integer");
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) {
    fail(path, "expected a number");
  }
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) {
    fail(path, "expected a string");
  }
  return v.get<std::string>();
}

template <class T, class Get>
std::vector<T> scalar_or_list(const json& v, const std::string& path, Get get) {
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) {
      fail(path, "list must not be empty");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(get(v[i], index_path(path, i)));
    }
  } else {
    out.push_back(get(v, path));
  }
  return out;
}

std::set<std::string> allowed_keys(CampaignKind kind) {
  std::set<std::string> keys{"name", "kind", "schemes", "trials", "base_seed", "output_path",
                             "deviations"};
  switch (kind) {
    case CampaignKind::Drift:
      keys.insert("rho_grid");
      break;
    case CampaignKind::Step:
      keys.insert({"n", "horizon", "x_percents", "mean_trace_slots", "trace_trials"});
      break;
    case CampaignKind::SingleEvent:
      keys.insert({"n", "y_percents", "max_slots", "trace_trials"});
      break;
    case CampaignKind::Repetitive:
      keys.insert({"theta", "lambda_bar", "horizon", "warmup", "residual_limit", "trace_trials"});
      break;
    case CampaignKind::StabilityScan:
      keys.insert({"theta", "lambda_bar", "horizons", "warmup_fraction", "residual_limit"});
      break;
  }
  return keys;
}

const json& required(const json& doc, std::string_view key) {
  const auto it = doc.find(std::string(key));
  if (it == doc.end()) {
    fail("$", "missing required field '" + std::string(key) + "'");
  }
  return *it;
}

bool is_additive(const SchemeParams& s) {
  return std::holds_alternative<estimators::FasaParams>(s) ||
         std::holds_alternative<estimators::PbParams>(s) ||
         std::holds_alternative<estimators::KellyParams>(s);
}

}  // namespace

std::string_view to_string(CampaignKind kind) noexcept {
  switch (kind) {
    case CampaignKind::Drift:
      return "drift";
    case CampaignKind::Step:
      return "step";
    case CampaignKind::SingleEvent:
      return "single_event";
    case CampaignKind::Repetitive:
      return "repetitive";
    case CampaignKind::StabilityScan:
      return "stability_scan";
  }
  return "unknown";
}

std::optional<CampaignKind> parse_kind(std::string_view text) noexcept {
  for (auto k : {CampaignKind::Drift, CampaignKind::Step, CampaignKind::SingleEvent,
                 CampaignKind::Repetitive, CampaignKind::StabilityScan}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

Campaign parse_campaign(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    fail("$", std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) {
    fail("$", "expected an object");
  }

  Campaign c;
  const std::string kind_text = as_string(required(doc, "kind"), "$.kind");
  const auto kind = parse_kind(kind_text);
  if (!kind) {
    fail("$.kind", "unknown kind '" + kind_text + "'");
  }
  c.kind = *kind;
  const auto allowed = allowed_keys(c.kind);
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) {
      fail(key_path("$", key), "unknown key for kind '" + kind_text + "'");
    }
  }
  const bool simulated = c.kind != CampaignKind::Drift;

  c.name = doc.contains("name") ? as_string(doc["name"], "$.name") : kind_text;
  if (doc.contains("output_path")) {
    c.output_path = as_string(doc["output_path"], "$.output_path");
  }
  if (doc.contains("deviations")) {
    const auto& d = doc["deviations"];
    if (!d.is_array()) {
      fail("$.deviations", "expected a list of strings");
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
      c.deviations.push_back(as_string(d[i], index_path("$.deviations", i)));
    }
  }

  const auto& schemes = required(doc, "schemes");
  if (!schemes.is_array() || schemes.empty()) {
    fail("$.schemes", "expected a non-empty list of scheme strings");
  }
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const std::string path = index_path("$.schemes", i);
    try {
      c.schemes.push_back(estimators::parse_scheme(as_string(schemes[i], path)));
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
    if (!simulated && !is_additive(c.schemes.back())) {
      fail(path, "drift curves need an additive scheme (fasa, pb or kelly)");
    }
  }

  if (simulated) {
    c.trials = as_count(required(doc, "trials"), "$.trials");
    if (c.trials < 1) {
      fail("$.trials", "must be >= 1");
    }
    c.base_seed = as_count(required(doc, "base_seed"), "$.base_seed");
  } else {
    if (doc.contains("trials")) {
      c.trials = as_count(doc["trials"], "$.trials");
      if (c.trials < 1) {
        fail("$.trials", "must be >= 1");
      }
    }
    if (doc.contains("base_seed")) {
      c.base_seed = as_count(doc["base_seed"], "$.base_seed");
    }
  }

  if (c.kind == CampaignKind::Step || c.kind == CampaignKind::SingleEvent) {
    c.n = scalar_or_list<std::uint64_t>(required(doc, "n"), "$.n", as_count);
    for (std::size_t i = 0; i < c.n.size(); ++i) {
      if (c.n[i] < 1) {
        fail(c.n.size() > 1 ? index_path("$.n", i) : "$.n", "must be >= 1");
      }
    }
  }
  if (c.kind == CampaignKind::Step || c.kind == CampaignKind::Repetitive) {
    c.horizon = as_count(required(doc, "horizon"), "$.horizon");
    if (c.horizon < 1) {
      fail("$.horizon", "must be >= 1");
    }
  }
  if (doc.contains("trace_trials")) {
    c.trace_trials = as_count(doc["trace_trials"], "$.trace_trials");
    if (c.trace_trials > c.trials) {
      fail("$.trace_trials", "must not exceed trials");
    }
  }

  switch (c.kind) {
    case CampaignKind::Drift:
      if (doc.contains("rho_grid")) {
        const auto& g = doc["rho_grid"];
        if (!g.is_object()) {
          fail("$.rho_grid", "expected an object with start, stop, step");
        }
        for (const auto& [key, value] : g.items()) {
          const std::string path = key_path("$.rho_grid", key);
          if (key == "start") {
            c.rho_grid.start = as_real(value, path);
          } else if (key == "stop") {
            c.rho_grid.stop = as_real(value, path);
          } else if (key == "step") {
            c.rho_grid.step = as_real(value, path);
          } else {
            fail(path, "unknown key");
          }
        }
        if (!(c.rho_grid.start > 0.0) || !(c.rho_grid.stop >= c.rho_grid.start) ||
            !(c.rho_grid.step > 0.0)) {
          fail("$.rho_grid", "need 0 < start <= stop and step > 0");
        }
      }
      break;
    case CampaignKind::Step:
      if (doc.contains("x_percents")) {
        c.x_percents = scalar_or_list<double>(doc["x_percents"], "$.x_percents", as_real);
        for (double x : c.x_percents) {
          if (!(x > 0.0 && x < 100.0)) {
            fail("$.x_percents", "every x must lie in (0, 100)");
          }
        }
      }
      if (doc.contains("mean_trace_slots")) {
        c.mean_trace_slots = as_count(doc["mean_trace_slots"], "$.mean_trace_slots");
        if (c.mean_trace_slots > c.horizon) {
          fail("$.mean_trace_slots", "must not exceed horizon");
        }
      }
      break;
    case CampaignKind::SingleEvent:
      if (doc.contains("y_percents")) {
        c.y_percents = scalar_or_list<double>(doc["y_percents"], "$.y_percents", as_real);
        for (double y : c.y_percents) {
          if (!(y > 0.0 && y <= 100.0)) {
            fail("$.y_percents", "every y must lie in (0, 100]");
          }
        }
      }
      if (doc.contains("max_slots")) {
        c.max_slots = as_count(doc["max_slots"], "$.max_slots");
        if (*c.max_slots < 1) {
          fail("$.max_slots", "must be >= 1");
        }
      }
      break;
    case CampaignKind::Repetitive:
    case CampaignKind::StabilityScan: {
      c.theta = scalar_or_list<double>(required(doc, "theta"), "$.theta", as_real);
      for (double t : c.theta) {
        if (!(t > 0.0 && t <= 1.0)) {
          fail("$.theta", "every theta must lie in (0, 1]");
        }
      }
      c.lambda_bar = scalar_or_list<double>(required(doc, "lambda_bar"), "$.lambda_bar", as_real);
      for (double lb : c.lambda_bar) {
        if (!(lb >= 0.0 && std::isfinite(lb))) {
          fail("$.lambda_bar", "every lambda_bar must be >= 0");
        }
      }
      if (doc.contains("residual_limit")) {
        c.residual_limit = as_real(doc["residual_limit"], "$.residual_limit");
        if (!(*c.residual_limit >= 0.0)) {
          fail("$.residual_limit", "must be >= 0");
        }
      }
      if (c.kind == CampaignKind::Repetitive) {
        if (doc.contains("warmup")) {
          c.warmup = as_count(doc["warmup"], "$.warmup");
          if (*c.warmup >= c.horizon) {
            fail("$.warmup", "must be < horizon");
          }
        }
      } else {
        c.horizons = scalar_or_list<std::uint64_t>(required(doc, "horizons"), "$.horizons",
                                                   as_count);
        for (auto h : c.horizons) {
          if (h < 1) {
            fail("$.horizons", "every horizon must be >= 1");
          }
        }
        if (doc.contains("warmup_fraction")) {
          c.warmup_fraction = as_real(doc["warmup_fraction"], "$.warmup_fraction");
          if (!(c.warmup_fraction >= 0.0 && c.warmup_fraction < 1.0)) {
            fail("$.warmup_fraction", "must lie in [0, 1)");
          }
        }
      }
      break;
    }
  }
  c.config_echo = doc.dump();
  return c;
}

namespace {

class Emitter {
 public:
  explicit Emitter(std::string experiment) : experiment_(std::move(experiment)) {}

  void add(const std::string& scheme, const std::string& param, std::string_view metric,
           const metrics::MetricSummary& s) {
    rows_.push_back({experiment_, scheme, param, std::string(metric), s.value, s.ci95_halfwidth,
                     s.trials});
  }

  void add_fraction(const std::string& scheme, const std::string& param,
                    std::span<const std::uint8_t> flags) {
    const double m = static_cast<double>(flags.size());
    const double k = static_cast<double>(std::count(flags.begin(), flags.end(), std::uint8_t{1}));
    const double f = k / m;
    rows_.push_back({experiment_, scheme, param, "unstable_fraction", f,
                     1.96 * std::sqrt(f * (1.0 - f) / m), flags.size()});
  }

  std::vector<ResultRow> take() { return std::move(rows_); }

 private:
  std::string experiment_;
  std::vector<ResultRow> rows_;
};

/// Runs fn(i) for all trials in blocks and hands each result to sink(i, r)
/// in trial order.
template <class F, class Sink>
void for_trials(std::uint64_t trials, unsigned workers, F&& fn, Sink&& sink) {
  for (std::uint64_t begin = 0; begin < trials; begin += kTrialBlock) {
    const std::uint64_t count = std::min(kTrialBlock, trials - begin);
    auto block = parallel_map(count, workers, [&](std::uint64_t k) { return fn(begin + k); });
    for (std::uint64_t k = 0; k < count; ++k) {
      sink(begin + k, std::move(block[k]));
    }
  }
}

// 10 significant digits keeps float noise out of the param column
std::string rounded(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string traffic_param(double theta, double lambda_bar) {
  const auto model = traffic::ArrivalModel::from_rate(lambda_bar, theta);
  return "theta=" + csv::number(theta) + ";lambda_bar=" + csv::number(lambda_bar) +
         ";sigma2=" + rounded(model.variance());
}

struct Files {
  std::optional<std::filesystem::path> dir;
  std::vector<std::string> written;

  std::ofstream open(const std::string& relative) {
    const auto path = *dir / relative;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    written.push_back(relative);
    return out;
  }

  static void close(std::ofstream& out, const std::string& relative) {
    out.flush();
    if (!out) {
      throw std::runtime_error("write to " + relative + " failed");
    }
  }
};

std::string trace_name(std::size_t scheme, std::size_t point, std::uint64_t trial) {
  return "traces/s" + std::to_string(scheme) + "_p" + std::to_string(point) + "/trace_" +
         std::to_string(trial) + ".csv";
}

void write_trace_file(Files& files, const std::string& name,
                      std::span<const sim::SlotRecord> trace) {
  auto out = files.open(name);
  sim::write_trace_csv(out, trace);
  Files::close(out, name);
}

// ---- drift -----------------------------------------------------------------

void run_drift(const Campaign& c, Emitter& emit, CampaignOutput& out) {
  const auto grid = analysis::make_rho_grid(c.rho_grid.start, c.rho_grid.stop, c.rho_grid.step);
  for (const auto& s : c.schemes) {
    const std::string label = estimators::format_scheme(s);
    std::vector<analysis::LabelledDesign> designs;
    std::vector<analysis::KellyInstance> kelly;
    double at_one = 0.0;
    if (const auto* f = std::get_if<estimators::FasaParams>(&s)) {
      designs.push_back({label, f->design});
      at_one = analysis::drift_phi(f->design, 1.0);
    } else if (const auto* p = std::get_if<estimators::PbParams>(&s)) {
      auto k = analysis::pb_kelly_instance(p->lambda_hat);
      k.label = label;
      at_one = analysis::kelly_drift(k.a_idle, k.a_success, k.a_collision, 1.0);
      kelly.push_back(std::move(k));
    } else {
      const auto& k = std::get<estimators::KellyParams>(s);
      kelly.push_back({label, k.a_idle, k.a_success, k.a_collision});
      at_one = analysis::kelly_drift(k.a_idle, k.a_success, k.a_collision, 1.0);
    }
    auto rows = analysis::emit_drift_curves(designs, kelly, grid);
    out.drift_curves.insert(out.drift_curves.end(), rows.begin(), rows.end());
    metrics::MetricSummary s1;
    s1.value = at_one;
    s1.trials = 1;
    emit.add(label, "rho=1", "drift_at_rho1", s1);
  }
}

// ---- step --------------------------------------------------------------------

struct StepTrial {
  std::vector<std::optional<double>> rising;
  std::optional<double> stationary;
  std::vector<double> n_hat;
  std::vector<double> streak;
  std::vector<double> throughput;
};

struct MeanTraceRow {
  std::string scheme;
  std::uint64_t n = 0;
  std::vector<double> n_hat;
  std::vector<double> streak;
  std::vector<double> throughput;
};

void run_step(const Campaign& c, unsigned workers, Emitter& emit, Files& files) {
  std::vector<MeanTraceRow> mean_rows;
  for (std::size_t ni = 0; ni < c.n.size(); ++ni) {
    const std::uint64_t n = c.n[ni];
    for (std::size_t si = 0; si < c.schemes.size(); ++si) {
      const auto& scheme = c.schemes[si];
      const std::string label = estimators::format_scheme(scheme);
      const std::size_t keep = c.mean_trace_slots;
      auto trial_fn = [&](std::uint64_t i) {
        const auto trace = sim::run_step_response(n, scheme, c.horizon, c.base_seed, i);
        std::vector<double> thr(trace.size());
        for (std::size_t t = 0; t < trace.size(); ++t) {
          thr[t] = trace[t].expected_throughput;
        }
        StepTrial r;
        for (double x : c.x_percents) {
          const auto rt = metrics::rising_time(thr, x);
          r.rising.push_back(rt ? std::optional<double>(static_cast<double>(*rt)) : std::nullopt);
        }
        r.stationary = metrics::stationary_throughput(thr);
        if (keep > 0) {
          r.n_hat.reserve(keep);
          r.streak.reserve(keep);
          for (std::size_t t = 0; t < keep; ++t) {
            r.n_hat.push_back(trace[t].n_hat);
            r.streak.push_back(static_cast<double>(trace[t].streak));
          }
          r.throughput.assign(thr.begin(), thr.begin() + static_cast<std::ptrdiff_t>(keep));
        }
        return r;
      };

      std::vector<std::vector<std::optional<double>>> rising(c.x_percents.size());
      std::vector<std::optional<double>> stationary;
      MeanTraceRow mean{label, n, std::vector<double>(keep, 0.0), std::vector<double>(keep, 0.0),
                        std::vector<double>(keep, 0.0)};
      for_trials(c.trials, workers, trial_fn, [&](std::uint64_t, StepTrial r) {
        for (std::size_t k = 0; k < rising.size(); ++k) {
          rising[k].push_back(r.rising[k]);
        }
        stationary.push_back(r.stationary);
        for (std::size_t t = 0; t < keep; ++t) {
          mean.n_hat[t] += r.n_hat[t];
          mean.streak[t] += r.streak[t];
          mean.throughput[t] += r.throughput[t];
        }
      });

      const std::string np = "n=" + std::to_string(n);
      for (std::size_t k = 0; k < rising.size(); ++k) {
        emit.add(label, np + ";x=" + csv::number(c.x_percents[k]), "rising_time",
                 metrics::summarize(rising[k], metrics::MetricTag::RisingTime));
      }
      emit.add(label, np, "stationary_throughput",
               metrics::summarize(stationary, metrics::MetricTag::StationaryThroughput));

      if (keep > 0) {
        const double m = static_cast<double>(c.trials);
        for (std::size_t t = 0; t < keep; ++t) {
          mean.n_hat[t] /= m;
          mean.streak[t] /= m;
          mean.throughput[t] /= m;
        }
        mean_rows.push_back(std::move(mean));
      }
      if (files.dir) {
        for (std::uint64_t i = 0; i < c.trace_trials; ++i) {
          write_trace_file(files, trace_name(si, ni, i),
                           sim::run_step_response(n, scheme, c.horizon, c.base_seed, i));
        }
      }
    }
  }
  if (files.dir && !mean_rows.empty()) {
    const std::string name = "step_mean_trace.csv";
    auto out = files.open(name);
    out << "scheme,n,t,n_hat_ratio,streak,expected_throughput\n";
    for (const auto& r : mean_rows) {
      const double nd = static_cast<double>(r.n);
      for (std::size_t t = 0; t < r.n_hat.size(); ++t) {
        out << csv::field(r.scheme) << ',' << r.n << ',' << t << ',' << csv::number(r.n_hat[t] / nd)
            << ',' << csv::number(r.streak[t]) << ',' << csv::number(r.throughput[t]) << '\n';
      }
    }
    Files::close(out, name);
  }
}

// ---- single event --------------------------------------------------------------

struct SingleTrial {
  std::vector<std::optional<double>> percentiles;
  std::optional<double> mean_delay;
  bool truncated = false;
  std::uint64_t slots = 0;
};

void run_single(const Campaign& c, unsigned workers, Emitter& emit, Files& files) {
  for (std::size_t ni = 0; ni < c.n.size(); ++ni) {
    const std::uint64_t n = c.n[ni];
    for (std::size_t si = 0; si < c.schemes.size(); ++si) {
      const auto& scheme = c.schemes[si];
      const std::string label = estimators::format_scheme(scheme);
      auto trial_fn = [&](std::uint64_t i) {
        const auto r = sim::run_single_event(n, scheme, c.base_seed, i, c.max_slots);
        SingleTrial t;
        for (double y : c.y_percents) {
          const auto d = metrics::delay_percentile(r.delays, y, n);
          t.percentiles.push_back(d ? std::optional<double>(static_cast<double>(*d))
                                    : std::nullopt);
        }
        if (!r.truncated) {
          double sum = 0.0;
          for (const auto& d : r.delays) {
            sum += static_cast<double>(d.delay());
          }
          t.mean_delay = sum / static_cast<double>(n);
        }
        t.truncated = r.truncated;
        t.slots = r.slots;
        return t;
      };
      std::vector<std::vector<std::optional<double>>> pct(c.y_percents.size());
      std::vector<std::optional<double>> mean;
      std::vector<std::uint8_t> truncated;
      std::vector<std::uint64_t> slots;
      for_trials(c.trials, workers, trial_fn, [&](std::uint64_t, SingleTrial t) {
        for (std::size_t k = 0; k < pct.size(); ++k) {
          pct[k].push_back(t.percentiles[k]);
        }
        mean.push_back(t.mean_delay);
        truncated.push_back(t.truncated);
        slots.push_back(t.slots);
      });
      const std::string np = "n=" + std::to_string(n);
      for (std::size_t k = 0; k < pct.size(); ++k) {
        emit.add(label, np + ";y=" + csv::number(c.y_percents[k]), "delay_percentile",
                 metrics::summarize(pct[k], metrics::MetricTag::DelayPercentile));
      }
      emit.add(label, np, "mean_delay", metrics::summarize(mean, metrics::MetricTag::MeanDelay));
      emit.add_fraction(label, np, truncated);

      if (files.dir) {
        for (std::uint64_t i = 0; i < c.trace_trials; ++i) {
          sim::ClosedLoopOptions opt;
          opt.initial_backlog.assign(n, 0);
          const auto r = sim::run_closed_loop(traffic::ArrivalModel::none(), scheme, slots[i],
                                              c.base_seed, i, std::move(opt));
          write_trace_file(files, trace_name(si, ni, i), r.trace);
        }
      }
    }
  }
}

// ---- repetitive / stability scan -------------------------------------------

struct RepetitiveTrial {
  std::optional<double> mean_delay;
  double residual = 0.0;
};

struct SchemeRun {
  std::vector<std::optional<double>> delays;
  std::vector<double> residuals;
  std::vector<std::uint8_t> unstable;
};

SchemeRun run_repetitive_scheme(const Campaign& c, unsigned workers,
                                const traffic::ArrivalModel& model, const SchemeParams& scheme,
                                std::uint64_t horizon, std::uint64_t warmup, double limit) {
  SchemeRun run;
  auto trial_fn = [&](std::uint64_t i) {
    const auto r = sim::run_repetitive(model, scheme, horizon, warmup, c.base_seed, i);
    return RepetitiveTrial{r.mean_delay, static_cast<double>(r.residual)};
  };
  for_trials(c.trials, workers, trial_fn, [&](std::uint64_t, RepetitiveTrial t) {
    run.delays.push_back(t.mean_delay);
    run.residuals.push_back(t.residual);
    run.unstable.push_back(t.residual > limit ? 1 : 0);
  });
  return run;
}

void run_closed_loop_kind(const Campaign& c, unsigned workers, Emitter& emit, Files& files) {
  const bool scan = c.kind == CampaignKind::StabilityScan;
  std::vector<SchemeParams> schemes = c.schemes;
  std::size_t oracle_index = schemes.size();
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    if (estimators::is_oracle(schemes[i])) {
      oracle_index = i;
      break;
    }
  }
  if (oracle_index == schemes.size()) {
    schemes.push_back(estimators::OracleParams{});
  }
  const std::vector<std::uint64_t> horizons = scan ? c.horizons
                                                   : std::vector<std::uint64_t>{c.horizon};

  std::size_t point = 0;
  for (double theta : c.theta) {
    for (double lb : c.lambda_bar) {
      const auto model = traffic::ArrivalModel::from_rate(lb, theta);
      const double limit = c.residual_limit.value_or(INFINITY);
      for (auto horizon : horizons) {
        const std::uint64_t warmup =
            scan ? static_cast<std::uint64_t>(std::floor(c.warmup_fraction *
                                                          static_cast<double>(horizon)))
                 : c.warmup.value_or(horizon / 10);
        std::string param = traffic_param(theta, lb);
        if (scan) {
          param += ";horizon=" + std::to_string(horizon);
        }
        std::vector<SchemeRun> runs;
        for (const auto& s : schemes) {
          runs.push_back(run_repetitive_scheme(c, workers, model, s, horizon, warmup, limit));
        }
        const auto& reference = runs[oracle_index];
        for (std::size_t si = 0; si < schemes.size(); ++si) {
          const std::string label = estimators::format_scheme(schemes[si]);
          const auto& r = runs[si];
          emit.add(label, param, "mean_delay",
                   metrics::summarize(r.delays, metrics::MetricTag::MeanDelay));
          if (si != oracle_index) {
            emit.add(label, param, "divergence",
                     metrics::paired_divergence(r.delays, reference.delays));
          }
          emit.add(label, param, "residual_backlog",
                   metrics::summarize(r.residuals, metrics::MetricTag::MeanDelay));
          if (c.residual_limit) {
            emit.add_fraction(label, param, r.unstable);
          }
        }
        if (!scan && files.dir) {
          for (std::size_t si = 0; si < c.schemes.size(); ++si) {
            for (std::uint64_t i = 0; i < c.trace_trials; ++i) {
              const auto r =
                  sim::run_closed_loop(model, c.schemes[si], horizon, c.base_seed, i);
              write_trace_file(files, trace_name(si, point, i), r.trace);
            }
          }
        }
      }
      ++point;
    }
  }
}

std::vector<std::string> method_notes(CampaignKind kind) {
  switch (kind) {
    case CampaignKind::Step:
      return {
          "rising_time: per-trial slots elapsed up to and including the first slot whose "
          "expected throughput reaches x% of 1/e, averaged over trials that reach it",
          "stationary_throughput: per-trial mean expected throughput from the 90% crossing to "
          "the horizon, averaged over trials"};
    case CampaignKind::SingleEvent:
      return {"delay_percentile: nearest rank over all n devices per trial, then averaged; a "
              "truncated trial contributes only ranks it served"};
    case CampaignKind::Repetitive:
    case CampaignKind::StabilityScan:
      return {"divergence: reference delay from the oracle policy on the same per-trial arrival "
              "realizations as every other scheme; CI is the paired ratio-of-means interval",
              "unstable_fraction: share of trials whose residual backlog exceeds residual_limit, "
              "emitted only when residual_limit is set"};
    case CampaignKind::Drift:
      break;
  }
  return {};
}

}  // namespace

std::string build_fingerprint() { return FASA_BUILD_FINGERPRINT; }

void write_summary_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "experiment,scheme,param,metric,value,ci95,trials\n";
  for (const auto& r : rows) {
    out << csv::field(r.experiment) << ',' << csv::field(r.scheme) << ',' << csv::field(r.param)
        << ',' << csv::field(r.metric) << ',' << csv::number(r.value) << ','
        << csv::number(r.ci95) << ',' << r.trials << '\n';
  }
}

CampaignOutput run_campaign(const Campaign& c, const RunOptions& options) {
  const unsigned workers = std::max(1u, options.workers);
  CampaignOutput out;
  Emitter emit(c.name);
  Files files{options.out_dir, {}};
  if (files.dir) {
    std::filesystem::create_directories(*files.dir);
  }
  switch (c.kind) {
    case CampaignKind::Drift:
      run_drift(c, emit, out);
      break;
    case CampaignKind::Step:
      run_step(c, workers, emit, files);
      break;
    case CampaignKind::SingleEvent:
      run_single(c, workers, emit, files);
      break;
    case CampaignKind::Repetitive:
    case CampaignKind::StabilityScan:
      run_closed_loop_kind(c, workers, emit, files);
      break;
  }
  out.rows = emit.take();

  if (files.dir) {
    if (c.kind == CampaignKind::Drift) {
      auto f = files.open("drift_curves.csv");
      analysis::write_drift_curves_csv(f, out.drift_curves);
      Files::close(f, "drift_curves.csv");
    }
    {
      auto f = files.open("summary.csv");
      write_summary_csv(f, out.rows);
      Files::close(f, "summary.csv");
    }
    nlohmann::ordered_json manifest;
    manifest["name"] = c.name;
    manifest["kind"] = std::string(to_string(c.kind));
    manifest["base_seed"] = c.base_seed;
    manifest["trials"] = c.trials;
    auto& schemes = manifest["schemes"] = nlohmann::ordered_json::array();
    for (const auto& s : c.schemes) {
      schemes.push_back(estimators::format_scheme(s));
    }
    manifest["fingerprint"] = build_fingerprint();
    manifest["config"] = nlohmann::ordered_json::parse(c.config_echo);
    auto& dev = manifest["deviations"] = nlohmann::ordered_json::array();
    for (const auto& d : method_notes(c.kind)) {
      dev.push_back(d);
    }
    for (const auto& d : c.deviations) {
      dev.push_back(d);
    }
    auto listed = files.written;
    listed.push_back("manifest.json");
    manifest["files"] = listed;
    auto f = files.open("manifest.json");
    f << manifest.dump(2) << '\n';
    Files::close(f, "manifest.json");
  }
  out.files = std::move(files.written);
  return out;
}

}  // namespace fasa::experiments
