// One PASS/FAIL line per criterion. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fasa/campaign.hpp"
#include "fasa/parallel.hpp"
#include "fasa/simulator.hpp"
#include "fasa/validation.hpp"

using namespace fasa;
using experiments::ResultRow;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 7;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string canon(const char* scheme) {
  return estimators::format_scheme(estimators::parse_scheme(scheme));
}

struct Lookup {
  std::vector<ResultRow> rows;

  // Param match is by prefix, so "n=1000" also matches "n=1000;x=50" unless
  // the caller is specific.
  double get(const char* scheme, const std::string& param, const std::string& metric) const {
    const std::string s = canon(scheme);
    for (const auto& r : rows) {
      if (r.scheme == s && r.metric == metric && r.param.rfind(param, 0) == 0) {
        return r.value.value_or(std::nan(""));
      }
    }
    return std::nan("");
  }
};

struct Report {
  int failed = 0;
  std::vector<std::string> detail;

  void expect(bool ok, const std::string& what) {
    detail.push_back(std::string(ok ? "    ok   " : "    MISS ") + what);
  }
  void info(const std::string& what) { detail.push_back("    info " + what); }
  bool all_ok() const {
    return std::none_of(detail.begin(), detail.end(),
                        [](const std::string& d) { return d.rfind("    MISS", 0) == 0; });
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool within_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * target; }

int g_failed = 0;

void criterion(int id, const char* title, const std::function<void(Report&)>& body) {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.expect(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = r.all_ok();
  g_failed += ok ? 0 : 1;
  std::printf("%s criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, title, secs);
  for (const auto& d : r.detail) {
    std::printf("%s\n", d.c_str());
  }
  std::fflush(stdout);
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::printf("fingerprint %s, workers %u, seed %llu\n", experiments::build_fingerprint().c_str(),
              workers(), static_cast<unsigned long long>(kSeed));

  criterion(1, "analytic suite", [](Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto checks = validation::run_validation();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& c : checks) {
      r.expect(c.passed, c.name + ": " + c.detail);
    }
    r.expect(secs < 10.0, fmt("runtime %.2f s < 10 s", secs));
  });

  Lookup step;
  criterion(2, "rising time, n=1000", [&](Report& r) {
    const auto c = experiments::parse_campaign(R"({
      "kind": "step", "name": "table1", "n": 1000, "horizon": 20000, "trials": 1000,
      "base_seed": 7, "x_percents": [10, 50, 90],
      "schemes": ["pb", "qplus", "fasa:eta=1,nu=1", "fasa:eta=1,nu=2", "fasa:eta=1,nu=3"]})");
    step.rows = experiments::run_campaign(c, {workers(), std::nullopt}).rows;
    const auto rt = [&](const char* s) { return step.get(s, "n=1000;x=50", "rising_time"); };
    const double pb = rt("pb"), f12 = rt("fasa:eta=1,nu=2"), qp = rt("qplus");
    const double f11 = rt("fasa:eta=1,nu=1"), f13 = rt("fasa:eta=1,nu=3");
    r.expect(within_rel(pb, 237.0, 0.10), fmt("PB 50%% = %.2f, target 237.0 +-10%%", pb));
    r.expect(within_rel(f12, 12.0, 0.15), fmt("FASA(1,2) 50%% = %.2f, target 12.0 +-15%%", f12));
    r.expect(within_rel(qp, 26.6, 0.15), fmt("Q+ 50%% = %.2f, target 26.6 +-15%%", qp));
    r.expect(f13 < f12 && f12 < f11,
             fmt("FASA(1,3) %.2f < FASA(1,2) %.2f < FASA(1,1) %.2f", f13, f12, f11));
  });

  criterion(3, "stationary throughput, n=1000", [&](Report& r) {
    const auto st = [&](const char* s) { return step.get(s, "n=1000", "stationary_throughput"); };
    const double f12 = st("fasa:eta=1,nu=2"), qp = st("qplus"), pb = st("pb");
    r.expect(std::abs(f12 - 0.3675) <= 0.003, fmt("FASA(1,2) = %.5f, target 0.3675 +-0.003", f12));
    r.expect(std::abs(qp - 0.3521) <= 0.003, fmt("Q+ = %.5f, target 0.3521 +-0.003", qp));
    r.expect(std::abs(pb - 0.3684) <= 0.003, fmt("PB = %.5f, target 0.3684 +-0.003", pb));
    r.expect(f12 >= qp + 0.01, fmt("FASA(1,2) %.5f >= Q+ %.5f + 0.01", f12, qp));
  });

  criterion(4, "single-event delay percentiles, n=1000", [](Report& r) {
    const auto c = experiments::parse_campaign(R"({
      "kind": "single_event", "name": "table3", "n": 1000, "trials": 500, "base_seed": 7,
      "y_percents": [10, 50, 90], "schemes": ["oracle", "fasa:eta=1,nu=2", "pb"]})");
    Lookup t{experiments::run_campaign(c, {workers(), std::nullopt}).rows};
    const auto dp = [&](const char* s, int y) {
      return t.get(s, "n=1000;y=" + std::to_string(y), "delay_percentile");
    };
    const double o50 = dp("oracle", 50), f10 = dp("fasa:eta=1,nu=2", 10), p10 = dp("pb", 10);
    const double f90 = dp("fasa:eta=1,nu=2", 90);
    r.expect(within_rel(o50, 1351.9, 0.02), fmt("Oracle 50%% = %.2f, target 1351.9 +-2%%", o50));
    r.expect(within_rel(f10, 290.8, 0.05), fmt("FASA(1,2) 10%% = %.2f, target 290.8 +-5%%", f10));
    r.expect(within_rel(p10, 542.4, 0.05), fmt("PB 10%% = %.2f, target 542.4 +-5%%", p10));
    r.expect(within_rel(f90, 2484.1, 0.02), fmt("FASA(1,2) 90%% = %.2f, target 2484.1 +-2%%", f90));
    r.expect(f10 < 0.6 * p10, fmt("FASA 10%% %.2f < 0.6 x PB 10%% = %.2f", f10, 0.6 * p10));
  });

  criterion(5, "divergence at theta=0.001", [](Report& r) {
    const auto c = experiments::parse_campaign(R"({
      "kind": "repetitive", "name": "divergence", "theta": 0.001, "lambda_bar": [0.15, 0.25],
      "horizon": 1000000, "trials": 40, "base_seed": 7,
      "schemes": ["fasa:eta=1,nu=2", "pb", "oracle"]})");
    Lookup t{experiments::run_campaign(c, {workers(), std::nullopt}).rows};
    for (const char* lb : {"0.15", "0.25"}) {
      const std::string p = std::string("theta=0.001;lambda_bar=") + lb + ";";
      const double f = t.get("fasa:eta=1,nu=2", p, "divergence");
      const double b = t.get("pb", p, "divergence");
      r.expect(f <= 0.05, fmt("FASA(1,2) lambda_bar=%.2f: e(D) = %.4f <= 0.05", std::stod(lb), f));
      r.expect(b >= 0.15 && b <= 0.30,
               fmt("PB lambda_bar=%.2f: e(D) = %.4f in [0.15, 0.30]", std::stod(lb), b));
    }
  });

  criterion(6, "stability below and above capacity", [](Report& r) {
    constexpr double theta = 0.001;
    constexpr std::uint64_t seeds = 20;
    const auto residuals = [&](const char* scheme, double lambda_bar, std::uint64_t horizon) {
      const auto s = estimators::parse_scheme(scheme);
      const auto model = traffic::ArrivalModel::from_rate(lambda_bar, theta);
      return parallel_map(seeds, workers(), [&](std::uint64_t i) {
        return static_cast<double>(
            sim::run_repetitive(model, s, horizon, horizon / 10, kSeed, i).residual);
      });
    };
    const auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };

    const double limit = 10.0 * (0.35 / theta);
    const auto fasa_res = residuals("fasa:eta=1,nu=2", 0.35, 1000000);
    const double worst = *std::max_element(fasa_res.begin(), fasa_res.end());
    const auto over = std::count_if(fasa_res.begin(), fasa_res.end(),
                                    [&](double x) { return x >= limit; });
    r.expect(over == 0, fmt("FASA(1,2) lambda_bar=0.35: %.0f of 20 seeds at or above %.0f (max %.0f)",
                            static_cast<double>(over), limit, worst));
    const auto oracle_res = residuals("oracle", 0.35, 1000000);
    r.info(fmt("FASA(1,2) mean residual %.1f, oracle mean residual %.1f, oracle max %.0f",
               mean(fasa_res), mean(oracle_res),
               *std::max_element(oracle_res.begin(), oracle_res.end())));

    const double r1 = mean(residuals("qplus", 0.36, 100000));
    const double r2 = mean(residuals("qplus", 0.36, 300000));
    const double r3 = mean(residuals("qplus", 0.36, 1000000));
    r.expect(r2 / r1 > 3.0, fmt("Q+ lambda_bar=0.36: r(3e5)/r(1e5) = %.0f/%.0f = %.3f > 3", r2, r1, r2 / r1));
    r.expect(r3 / r2 > 10.0 / 3.0,
             fmt("Q+ lambda_bar=0.36: r(1e6)/r(3e5) = %.0f/%.0f = %.3f > 3.333", r3, r2, r3 / r2));
    r.info(std::string("Q+ mean residual increasing in horizon: ") +
           ((r1 < r2 && r2 < r3) ? "yes" : "no"));
  });

  criterion(7, "byte-identical summary.csv at 1 and 4 workers", [](Report& r) {
    const char* configs[] = {
        R"({"kind":"drift","schemes":["fasa:eta=1,nu=2","pb"]})",
        R"({"kind":"step","n":[500,1000],"schemes":["fasa:eta=1,nu=2","pb","qplus","oracle"],"trials":300,"horizon":2000,"base_seed":7})",
        R"({"kind":"single_event","n":500,"schemes":["fasa:eta=1,nu=2","pb","oracle"],"trials":300,"base_seed":7})",
        R"({"kind":"repetitive","theta":[0.001,0.01],"lambda_bar":[0.15,0.3],"schemes":["fasa:eta=1,nu=2","pb"],"trials":8,"horizon":50000,"base_seed":7})",
        R"({"kind":"stability_scan","theta":0.001,"lambda_bar":[0.3,0.36],"horizons":[20000,50000],"schemes":["qplus"],"trials":8,"base_seed":7})",
    };
    const auto root = fs::temp_directory_path() / "fasa_acceptance_determinism";
    fs::remove_all(root);
    int k = 0;
    for (const char* text : configs) {
      const auto c = experiments::parse_campaign(text);
      std::vector<std::string> outputs;
      for (unsigned w : {1u, 4u, 1u, 4u}) {
        const auto dir = root / (std::to_string(k) + "_" + std::to_string(outputs.size()));
        experiments::run_campaign(c, {w, dir});
        outputs.push_back(read(dir / "summary.csv"));
      }
      const bool same = std::all_of(outputs.begin(), outputs.end(),
                                    [&](const std::string& s) { return s == outputs[0]; });
      r.expect(same && !outputs[0].empty(),
               std::string(experiments::to_string(c.kind)) + ": " +
                   std::to_string(outputs[0].size()) + " bytes, workers 1,4,1,4");
      ++k;
    }
    fs::remove_all(root);
  });

  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
