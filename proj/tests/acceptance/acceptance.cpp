// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "thermocast/baselines.hpp"
#include "thermocast/ensemble.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/mi.hpp"
#include "thermocast/mlp.hpp"
#include "thermocast/pipeline.hpp"
#include "thermocast/preprocess.hpp"
#include "thermocast/random.hpp"
#include "thermocast/search.hpp"
#include "thermocast/synth.hpp"

using namespace thermocast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1 -------------------------------------------------------------------------

double loss_at(const Mlp& net, std::span<const double> input, std::span<const double> target, double eps) {
    return loss(net, net.forward(input), target, eps);
}

Outcome gradient_check() {
    const auto start = Clock::now();
    Rng rng(2024);
    const double h = 1e-5;
    double worst = 0.0;
    const int configs = 120;
    for (int trial = 0; trial < configs; ++trial) {
        MlpConfig config;
        config.inputs = 1 + rng.below(8);
        config.outputs = 1 + rng.below(6);
        config.hidden.clear();
        const std::size_t depth = 1 + rng.below(2);
        for (std::size_t l = 0; l < depth; ++l)
            config.hidden.push_back({1 + rng.below(8), rng.below(2) ? Activation::Tanh : Activation::Logistic});
        config.seed = 1000 + trial;
        const double eps = std::pow(10.0, -1.0 - 5.0 * rng.uniform());
        Mlp net(config);
        std::vector<double> input(config.inputs), target(config.outputs);
        for (auto& x : input) x = 2 * rng.uniform() - 1;
        for (auto& y : target) y = 2 * rng.uniform() - 1;

        const auto grad = gradient(net, input, target, eps);
        auto probe = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = loss_at(net, input, target, eps);
            param = saved - h;
            const double down = loss_at(net, input, target, eps);
            param = saved;
            const double numeric = (up - down) / (2 * h);
            // Floor keeps near-zero components from dividing round-off by zero.
            const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            worst = std::max(worst, std::abs(numeric - analytic) / scale);
        };
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto& layer = net.layers()[l];
            for (std::size_t i = 0; i < layer.weights.size(); ++i) probe(layer.weights[i], grad.weights[l][i]);
            for (std::size_t i = 0; i < layer.biases.size(); ++i) probe(layer.biases[i], grad.biases[l][i]);
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-4 && elapsed < 30.0,
            fmt("%d configs, max relative error %.2e (< 1e-4), %.1f s (< 30 s)", configs, worst, elapsed)};
}

// 2 -------------------------------------------------------------------------

Outcome metric_oracle() {
    Rng rng(7);
    double worst = 0.0;
    bool ordered = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(24);
        std::vector<double> pred(n), target(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = 15.0 + 10.0 * rng.uniform();
            target[i] = 15.0 + 10.0 * rng.uniform();
        }
        long double abs_sum = 0, sq_sum = 0, pct_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long double e = static_cast<long double>(pred[i]) - target[i];
            abs_sum += std::fabs(e);
            sq_sum += e * e;
            pct_sum += std::fabs(e) / ((std::fabs(static_cast<long double>(pred[i])) + std::fabs(target[i])) / 2);
        }
        const double ref_mae = static_cast<double>(abs_sum / n);
        const double ref_rmse = static_cast<double>(std::sqrt(sq_sum / n));
        const double ref_smape = static_cast<double>(100 * pct_sum / n);
        const double m = mae(pred, target), r = rmse(pred, target), s = smape(pred, target);
        worst = std::max({worst, std::abs(m - ref_mae), std::abs(r - ref_rmse), std::abs(s - ref_smape)});
        ordered = ordered && r >= m;
    }
    return {worst <= 1e-12 && ordered,
            fmt("1000 pairs, max deviation %.2e (<= 1e-12), RMSE >= MAE %s", worst, ordered ? "always" : "violated")};
}

// 3 -------------------------------------------------------------------------

Outcome softmax_weights() {
    Rng rng(3);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<MemberScore> scores;
        const std::size_t m = 1 + rng.below(11);
        for (std::size_t i = 0; i < m; ++i) scores.push_back({"m", 2 * i + 1, 0.01 + rng.uniform()});
        worst_sum = std::max(worst_sum, std::abs(combine_softmax(scores).weight_sum() - 1.0));
    }
    bool uniform = true;
    for (std::size_t m = 1; m <= 11; ++m) {
        std::vector<MemberScore> scores;
        for (std::size_t i = 0; i < m; ++i) scores.push_back({"m", 2 * i + 1, 0.17});
        for (const auto& member : combine_softmax(scores).members)
            uniform = uniform && member.weight == 1.0 / static_cast<double>(m);
    }
    const auto pair = combine_softmax(std::vector<MemberScore>{{"a", 1, 0.5}, {"b", 3, 1.0}});
    const double w0 = pair.members[0].weight, w1 = pair.members[1].weight;
    const bool pair_ok = std::abs(w0 - 0.7311) <= 1e-4 && std::abs(w1 - 0.2689) <= 1e-4;
    return {worst_sum <= 1e-12 && uniform && pair_ok,
            fmt("max |sum - 1| %.1e, equal scores uniform: %s, {0.5, 1.0} -> {%.4f, %.4f}", worst_sum,
                uniform ? "yes" : "no", w0, w1)};
}

// 4 -------------------------------------------------------------------------

Outcome convexity_bound() {
    Rng rng(4);
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 50 + rng.below(100), horizon = 12, members = 2 + rng.below(10);
        std::vector<double> actuals(rows * horizon);
        double level = 20.0;
        for (auto& a : actuals) a = (level += 0.05 * rng.normal());
        std::vector<ForecastMatrix> forecasts(members);
        std::vector<MemberScore> scores;
        double worst_member = 0.0;
        for (std::size_t m = 0; m < members; ++m) {
            const double bias = 0.3 * rng.normal(), spread = 0.05 + 0.5 * rng.uniform();
            forecasts[m].horizon = horizon;
            for (std::size_t r = 0; r < rows; ++r) forecasts[m].origins.push_back(r);
            for (double a : actuals) forecasts[m].values.push_back(a + bias + spread * rng.normal());
            const double member_mae = evaluate("m", forecasts[m], actuals).mae.mean;
            worst_member = std::max(worst_member, member_mae);
            scores.push_back({"m" + std::to_string(m), 2 * m + 1, member_mae});
        }
        for (auto strategy : {Strategy::CombEq, Strategy::CombExp}) {
            const auto spec = build_ensemble(strategy, scores);
            if (!(evaluate("e", combine_forecasts(spec, forecasts), actuals).mae.mean <= worst_member)) ++violations;
        }
    }
    return {violations == 0, fmt("100 validation sets x {COMB-EQ, COMB-EXP}, %d violations", violations)};
}

// 5 -------------------------------------------------------------------------

Outcome differencing_round_trip() {
    Rng rng(5);
    double worst = 0.0;
    std::vector<double> series;
    for (int trial = 0; trial < 1000000; ++trial) {
        series.resize(2 + rng.below(31));
        for (auto& v : series) v = 20.0 + 5.0 * rng.normal();
        const auto back = invert_difference(difference(series), series[0]);
        for (std::size_t i = 0; i < back.size(); ++i) worst = std::max(worst, std::abs(back[i] - series[i + 1]));
    }
    return {worst < 1e-9, fmt("1e6 series, max abs error %.2e (< 1e-9)", worst)};
}

// 6 -------------------------------------------------------------------------

Outcome ar_recovery() {
    const auto start = Clock::now();
    std::vector<double> phi1, phi2;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<double> y{0.0, 0.0, 0.0};
        double d1 = 0.0, d2 = 0.0;
        while (y.size() < 5000) {
            const double d = 0.5 * d1 + 0.3 * d2 + rng.normal();
            y.push_back(y.back() + d);
            d2 = d1;
            d1 = d;
        }
        const auto model = fit_arima(y, {}, HourRegressors::None);
        phi1.push_back(model.ar[0]);
        phi2.push_back(model.ar[1]);
    }
    const double m1 = median(phi1), m2 = median(phi2), elapsed = seconds_since(start);
    return {std::abs(m1 - 0.5) <= 0.05 && std::abs(m2 - 0.3) <= 0.05 && elapsed < 10.0,
            fmt("median phi = (%.4f, %.4f) vs (0.5, 0.3) +/- 0.05, %.2f s (< 10 s)", m1, m2, elapsed)};
}

// 7 -------------------------------------------------------------------------

Outcome mi_properties() {
    Rng rng(6);
    std::vector<double> x(20000), y(20000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = std::sin(x[i]) + 0.3 * rng.normal();
    }
    const auto self = histogram_pair(x, x, 64);
    const bool identity = mutual_information(self) == entropy(self.x_marginal);
    const double nself = normalized_mi(x, x, 64);
    const double asym = std::abs(mutual_information(x, y, 64) - mutual_information(y, x, 64));

    std::vector<double> u(100000), v(100000);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = rng.uniform();
        v[i] = rng.uniform();
    }
    const double independent = mutual_information(u, v, 16);
    return {identity && nself == 2.0 && asym <= 1e-12 && independent < 0.01,
            fmt("MI(X;X) = H(X): %s, normalized self-MI %.2f, asymmetry %.1e, independent MI %.4f bits",
                identity ? "exact" : "no", nself, asym, independent)};
}

// 8, 9 ----------------------------------------------------------------------

struct SeedRun {
    double ann_d = 0.0;
    double ann_dhw = 0.0;
    double smape_first_d = 0.0, smape_last_d = 0.0;
    double smape_first_dhw = 0.0, smape_last_dhw = 0.0;
};

struct EndToEnd {
    double baseline = 0.0;
    std::string baseline_name;
    std::vector<SeedRun> runs;
    double seconds = 0.0;
};

const EndToEnd& end_to_end() {
    static const EndToEnd result = [] {
        EndToEnd out;
        const auto start = Clock::now();
        const auto ingested = build_frames(generate(SynthConfig{}), {});
        const auto data = make_dataset(ingested.frames.front());
        const auto sizes = default_past_sizes();
        const std::size_t horizon = 12;
        const auto origins = evaluation_origins(data, Split::Validation, horizon, sizes.back());
        const auto actuals = window_actuals(data, origins, horizon);

        const auto target = training_target(data);
        const auto hours = training_hours(data);
        out.baseline = std::numeric_limits<double>::infinity();
        auto consider = [&](const std::string& name, const ForecastMatrix& f) {
            const double m = evaluate(name, f, actuals).mae.mean;
            if (m < out.baseline) {
                out.baseline = m;
                out.baseline_name = name;
            }
        };
        for (const auto& ets : fit_ets_family(target)) consider(ets.name(), forecast(ets, data, origins, horizon));
        for (auto kind : {HourRegressors::None, HourRegressors::Factor, HourRegressors::Quadratic}) {
            const auto arima = fit_arima(target, hours, kind);
            consider(arima.name(), forecast(arima, data, origins, horizon));
        }

        MlpConfig plain;
        plain.hidden = parse_hidden_layout("8t-8t");
        plain.learning_rate = 0.005;
        plain.momentum = 0.001;
        plain.weight_decay = 1e-6;
        MlpConfig full;
        full.hidden = parse_hidden_layout("24t-16t");
        full.learning_rate = 0.005;
        full.momentum = 0.005;
        full.weight_decay = 1e-5;
        for (auto* c : {&plain, &full}) {
            c->epochs = 300;
            c->patience = 30;
        }
        const std::vector<Channel> with_sun{Channel::Hour, Channel::Irradiance};
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            plain.seed = full.seed = seed;
            SeedRun run;
            auto score = [&](const std::vector<Channel>& covariates, const MlpConfig& config, double& mae_out,
                             double& first, double& last) {
                const auto members = sweep_past_sizes(data, covariates, sizes, config);
                const auto ensemble = assemble_ensemble(Strategy::CombExp, members);
                const auto report = evaluate("e", forecast(ensemble, data, origins), actuals);
                mae_out = report.mae.mean;
                first = report.smape_by_horizon.front().mean;
                last = report.smape_by_horizon.back().mean;
            };
            score({}, plain, run.ann_d, run.smape_first_d, run.smape_last_d);
            score(with_sun, full, run.ann_dhw, run.smape_first_dhw, run.smape_last_dhw);
            std::printf("  seed %llu: ANN(d) %.4f, ANN(d+h+W) %.4f\n", static_cast<unsigned long long>(seed),
                        run.ann_d, run.ann_dhw);
            std::fflush(stdout);
            out.runs.push_back(run);
        }
        out.seconds = seconds_since(start);
        return out;
    }();
    return result;
}

Outcome qualitative_ordering() {
    const auto& e = end_to_end();
    std::vector<double> d, dhw;
    for (const auto& r : e.runs) {
        d.push_back(r.ann_d);
        dhw.push_back(r.ann_dhw);
    }
    const double md = median(d), mw = median(dhw);
    const double gap_sun = 1.0 - mw / md, gap_base = 1.0 - md / e.baseline;
    return {gap_sun >= 0.05 && gap_base >= 0.05 && e.seconds < 600.0,
            fmt("median MAE* ANN(d+h+W) %.4f < ANN(d) %.4f < %s %.4f, gaps %.1f%% and %.1f%% (>= 5%%), %.0f s (< 600 s)",
                mw, md, e.baseline_name.c_str(), e.baseline, 100 * gap_sun, 100 * gap_base, e.seconds)};
}

Outcome horizon_degradation() {
    const auto& e = end_to_end();
    std::vector<double> first_d, last_d, first_w, last_w;
    for (const auto& r : e.runs) {
        first_d.push_back(r.smape_first_d);
        last_d.push_back(r.smape_last_d);
        first_w.push_back(r.smape_first_dhw);
        last_w.push_back(r.smape_last_dhw);
    }
    const double f_d = median(first_d), l_d = median(last_d), f_w = median(first_w), l_w = median(last_w);
    return {l_d > f_d && l_w > f_w,
            fmt("median SMAPE 15 min -> 180 min: ANN(d) %.4f -> %.4f, ANN(d+h+W) %.4f -> %.4f", f_d, l_d, f_w, l_w)};
}

// 10 ------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string command = std::string(THERMOCAST_CLI) + " " + args + " >> " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = ss.str();
    }
    return files;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "thermocast_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream cfg(root / "run.json");
        cfg << R"({
  "format": "thermocast-run/1",
  "data": {"raw": "data/raw.csv"},
  "window": {"covariates": "d+h+W", "target_past": 5},
  "mlp": {"hidden": "8t", "epochs": 15, "patience": 5, "seed": 3},
  "sweep": {"past_sizes": [1, 3, 5]},
  "grid": {"covariate_sets": ["d", "d+h+W"], "layouts": ["8t"], "learning_rates": [0.005],
           "momenta": [0.001, 0.005], "weight_decays": [1e-6], "epochs": 10, "patience": 5}
}
)";
    }
    const std::string cfg = (root / "run.json").string();
    const fs::path log = root / "log.txt";
    if (run_cli("synth --days 35 --out " + (root / "data").string(), log) != 0)
        return {false, "synth failed, see " + log.string()};

    auto pipeline = [&](const fs::path& out, int jobs) -> bool {
        const std::string o = out.string();
        const std::string common = " --config " + cfg + " --jobs " + std::to_string(jobs);
        const std::vector<std::string> steps{
            "ingest" + common + " --out " + o + "/ingest",
            "preprocess" + common + " --out " + o + "/preprocess",
            "train" + common + " --out " + o + "/train",
            "sweep" + common + " --out " + o + "/sweep",
            "ensemble" + common + " --sweep " + o + "/sweep --out " + o + "/ensemble",
            "baseline" + common + " --out " + o + "/baseline",
            "evaluate" + common + " --model " + o + "/ensemble/ensemble_COMB-EXP.json --out " + o + "/evaluate",
            "report" + common + " --model " + o + "/train/model.json --model " + o +
                "/ensemble/ensemble_COMB-EXP.json --model " + o + "/baseline/ets.json --model " + o +
                "/baseline/arimaf.json --out " + o + "/report",
            "mi" + common + " --out " + o + "/mi",
            "gridsearch" + common + " --out " + o + "/grid",
        };
        for (const auto& step : steps)
            if (run_cli(step, log) != 0) return false;
        return true;
    };
    if (!pipeline(root / "a", 1) || !pipeline(root / "b", 2)) return {false, "pipeline failed, see " + log.string()};

    auto a = read_tree(root / "a"), b = read_tree(root / "b");
    // Trial stores record wall-clock durations.
    for (auto* tree : {&a, &b}) tree->erase("grid/trials.csv");
    std::size_t differing = 0;
    std::string first_diff;
    std::set<std::string> names;
    for (const auto& [name, _] : a) names.insert(name);
    for (const auto& [name, _] : b) names.insert(name);
    for (const auto& name : names) {
        if (a.count(name) && b.count(name) && a[name] == b[name]) continue;
        if (differing++ == 0) first_diff = name;
    }
    return {differing == 0 && !a.empty(),
            fmt("%zu files compared across two runs (1 and 2 threads), %zu differ%s%s", a.size(), differing,
                differing ? ", first: " : "", first_diff.c_str())};
}

// 11 ------------------------------------------------------------------------

Outcome ci_coverage() {
    Rng rng(11);
    const int replications = 10000;
    const std::size_t n = 200;
    const double mean = 0.3, sd = 0.1;
    int covered = 0;
    std::vector<double> errors(n);
    for (int r = 0; r < replications; ++r) {
        for (auto& e : errors) e = mean + sd * rng.normal();
        const auto ci = mean_with_ci(errors, LossKind::Mae);
        if (ci.lower <= mean && mean <= ci.upper) ++covered;
    }
    const double coverage = static_cast<double>(covered) / replications;
    return {coverage >= 0.98 && coverage <= 1.0,
            fmt("%d replications of n = %zu, coverage %.4f (in [0.98, 1.00])", replications, n, coverage)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_check},
        {"metric oracle equivalence", metric_oracle},
        {"softmax combination", softmax_weights},
        {"ensemble convexity bound", convexity_bound},
        {"differencing round trip", differencing_round_trip},
        {"AR recovery", ar_recovery},
        {"MI properties", mi_properties},
        {"end-to-end ordering", qualitative_ordering},
        {"horizon degradation", horizon_degradation},
        {"determinism", determinism},
        {"CI coverage", ci_coverage},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(number)) continue;
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("criterion %2d %s  %s: %s\n", number, outcome.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
