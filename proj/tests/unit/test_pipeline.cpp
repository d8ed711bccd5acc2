#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "thermocast/error.hpp"
#include "thermocast/manifest.hpp"
#include "thermocast/persistence.hpp"
#include "thermocast/pipeline.hpp"
#include "thermocast/run_config.hpp"

using namespace thermocast;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TrainedMlp quick_model(const Dataset& data, const std::vector<Channel>& covariates) {
    MlpConfig config;
    config.hidden = parse_hidden_layout("4t");
    config.epochs = 3;
    config.patience = 2;
    return train_model(data, make_window_spec(covariates, 3), config, "quick");
}

}  // namespace

TEST_CASE("evaluation origins are shared across model types") {
    const auto data = make_dataset(testutil::sine_frame(3360));
    const auto origins = evaluation_origins(data, Split::Validation, 12, 21);
    CHECK(origins.front() == 2015);
    CHECK(origins.back() == 2016 + 672 - 13);
    CHECK(origins.size() == 661);
    const auto actuals = window_actuals(data, origins, 12);
    CHECK(actuals[0] == data.frame.at(Channel::Temperature)[2016]);
}

TEST_CASE("models round trip through JSON") {
    const auto data = make_dataset(testutil::sine_frame(3360));
    const auto dir = testutil::scratch_dir("persist");
    const auto origins = evaluation_origins(data, Split::Validation, 12, 3);

    const auto trained = quick_model(data, {Channel::Hour, Channel::Irradiance});
    save_model(dir / "mlp.json", AnyModel(trained.model));
    const auto back = std::get<MlpModel>(load_model(dir / "mlp.json"));
    CHECK(forecast(back, data, origins).values == forecast(trained.model, data, origins).values);
    save_model(dir / "again.json", AnyModel(back));
    CHECK(slurp(dir / "mlp.json") == slurp(dir / "again.json"));

    const auto ets = fit_ets(training_target(data), EtsError::Additive, EtsTrend::Damped);
    save_model(dir / "ets.json", AnyModel(ets));
    const auto ets_back = std::get<EtsModel>(load_model(dir / "ets.json"));
    CHECK(forecast(ets_back, data, origins, 12).values == forecast(ets, data, origins, 12).values);

    const auto arima = fit_arima(training_target(data), training_hours(data), HourRegressors::Factor);
    save_model(dir / "arima.json", AnyModel(arima));
    const auto arima_back = std::get<ArimaModel>(load_model(dir / "arima.json"));
    CHECK(forecast(arima_back, data, origins, 12).values == forecast(arima, data, origins, 12).values);
}

TEST_CASE("malformed model files name the field") {
    const auto dir = testutil::scratch_dir("persist_bad");
    testutil::write_text(dir / "m.json", R"({"format": "thermocast-model/1", "kind": "ets", "error": "A", "trend": 3})");
    CHECK_THROWS_AS(load_model(dir / "m.json"), ConfigError);
    testutil::write_text(dir / "n.json", R"({"format": "other/1"})");
    CHECK_THROWS_WITH(load_model(dir / "n.json"), Catch::Matchers::ContainsSubstring("format"));
}

TEST_CASE("missing covariates are a data error") {
    const auto data = make_dataset(testutil::sine_frame(3360));
    const auto trained = quick_model(data, {Channel::Irradiance});
    auto frame = data.frame;
    frame.channels.erase(Channel::Irradiance);
    CHECK_THROWS_AS(check_compatible(AnyModel(trained.model), frame), DataError);
}

TEST_CASE("run config parsing") {
    const auto cfg = parse_run_config(R"({"format": "thermocast-run/1", "window": {"covariates": "d+h+W"},
        "mlp": {"hidden": "24t-16t", "learning_rate": 0.005}, "sweep": {"past_sizes": [1, 3]}})", "/tmp");
    CHECK(cfg.window.covariates == std::vector<Channel>{Channel::Hour, Channel::Irradiance});
    CHECK(cfg.mlp.hidden.size() == 2);
    CHECK(cfg.past_sizes == std::vector<std::size_t>{1, 3});

    CHECK_THROWS_WITH(parse_run_config(R"({"format": "thermocast-run/1", "mlp": {"epochs": "many"}})", "/tmp"),
                      Catch::Matchers::ContainsSubstring("mlp.epochs"));
    CHECK_THROWS_WITH(parse_run_config(R"({"format": "thermocast-run/1", "mlp": {"epoch": 3}})", "/tmp"),
                      Catch::Matchers::ContainsSubstring("mlp.epoch"));
    CHECK_THROWS_AS(parse_run_config("{not json", "/tmp"), ConfigError);
}

TEST_CASE("hashing") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
