#include <gtest/gtest.h>

#include <pvcast/cli.hpp>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace pvcast;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return fsutil::read_file(p); }

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

class Cli : public ::testing::Test {
protected:
    pvcast::testing::TempDir dir;
    std::string path(const std::string& name) const { return (dir / name).string(); }

    // 14 days straddling the default split boundary
    void synth(const std::string& relation = "nonlinear") {
        auto r = run({"synth", "--out", path("weather.csv"), "--actual-out", path("actual.csv"), "--days", "14",
                      "--start", "2016-12-25", "--relation", relation, "--seed", "3"});
        ASSERT_EQ(r.code, 0) << r.err;
    }
    Result ingest(std::vector<std::string> extra = {}) {
        std::vector<std::string> a{"ingest", "--input", path("weather.csv"), "--artifact-dir", path("art")};
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    }
    Result train(std::vector<std::string> extra = {}) {
        std::vector<std::string> a{"train", "--artifact-dir", path("art")};
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    }
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "--epochs", "ten"}).code, cli::kUsage);
    EXPECT_EQ(run({"train", "--model", "forest"}).code, cli::kUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(Cli, MissingColumnIsSchemaError) {
    write(path("weather.csv"), "time,ghi_pyr\n2017-01-01 00:00,0\n");
    auto r = ingest();
    EXPECT_EQ(r.code, cli::kSchema);
    EXPECT_NE(r.err.find("missing"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingInputFile) {
    EXPECT_EQ(ingest().code, cli::kEmpty);
    EXPECT_EQ(train().code, cli::kEmpty);
    EXPECT_EQ(run({"evaluate", "--predicted", path("p.csv"), "--actual", path("a.csv")}).code, cli::kEmpty);
    EXPECT_EQ(run({"report", "--report-dir", path("rep")}).code, cli::kEmpty);
}

TEST_F(Cli, NoAcceptedRowsIsEmpty) {
    synth();
    auto text = slurp(path("weather.csv"));
    write(path("weather.csv"), text.substr(0, text.find('\n') + 1));
    EXPECT_EQ(ingest().code, cli::kEmpty);
}

TEST_F(Cli, StrictRangeTally) {
    synth();
    auto text = slurp(path("weather.csv"));
    // push the first row's air temperature outside its feature bounds
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    auto header = text::split(lines[0], ',');
    auto fields = text::split(lines[1], ',');
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) row += ',';
        row += header[i] == "air_temperature" ? std::string_view("45.0") : fields[i];
    }
    lines[1] = row;
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    write(path("weather.csv"), joined);

    auto lenient = ingest();
    ASSERT_EQ(lenient.code, 0) << lenient.err;
    EXPECT_NE(lenient.out.find("rows rejected: 0"), std::string::npos) << lenient.out;
    EXPECT_NE(lenient.out.find("air_temperature: 1"), std::string::npos) << lenient.out;
    auto strict = ingest({"--strict-range"});
    ASSERT_EQ(strict.code, 0) << strict.err;
    EXPECT_NE(strict.out.find("outside feature bounds: 1"), std::string::npos) << strict.out;
}

TEST_F(Cli, EmptyTrainSet) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    auto r = train({"--boundary", "2000-01-01", "--model", "linreg"});
    EXPECT_EQ(r.code, cli::kEmpty);
    EXPECT_NE(r.err.find("empty train set"), std::string::npos);
}

TEST_F(Cli, PredictOneDayAndCompositionalOracle) {
    synth("linear");
    ASSERT_EQ(ingest().code, 0);
    ASSERT_EQ(train({"--model", "linreg"}).code, 0);
    auto r = run({"predict", "--artifact-dir", path("art"), "--from", "2017-01-03", "--to", "2017-01-03", "--out",
                  path("pred.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream pin(path("pred.csv"));
    auto series = eval::read_power_csv(pin);
    ASSERT_EQ(series.size(), 144u);
    EXPECT_EQ(format_timestamp(series.front().time), "2017-01-03 00:00");
    EXPECT_EQ(format_timestamp(series.back().time), "2017-01-03 23:50");

    // the same answer chained through the library directly
    auto records = ingest::parse_csv(slurp(path("weather.csv"))).records;
    const auto spec = default_feature_spec();
    const physics::PanelArray panel;
    auto all = features::build_dataset(records, spec, features::DatasetLayout{}, panel).matrix;
    auto split = features::chronological_split(all);
    auto lin = models::fit_linear(split.train);
    std::vector<ingest::WeatherRecord> day;
    for (const auto& rec : records)
        if (date_of(rec.time) == *make_date(2017, 1, 3)) day.push_back(rec);
    auto m = features::build_dataset(day, spec, features::DatasetLayout{}, panel).matrix;
    auto y = models::predict(lin, m);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double g = std::max(0.0, features::denormalize_value(spec.at("ghi_pyr"), y[i]));
        double p = std::clamp(physics::instantaneous_power(g, panel), 0.0, panel.rated_power_w());
        ASSERT_EQ(series[i].watts, p) << i;
    }
}

TEST_F(Cli, LayoutMismatch) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    ASSERT_EQ(train({"--model", "linreg"}).code, 0);
    auto r = run({"predict", "--artifact-dir", path("art"), "--all-features"});
    EXPECT_EQ(r.code, cli::kMismatch) << r.err;
}

TEST_F(Cli, CorruptArtifact) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    ASSERT_EQ(train({"--model", "linreg"}).code, 0);
    auto text = slurp(dir / "art" / "model.json");
    write(path("art/model.json"), text.substr(0, text.size() / 2));
    EXPECT_EQ(run({"predict", "--artifact-dir", path("art")}).code, cli::kSchema);
}

TEST_F(Cli, NoOverlap) {
    synth();
    eval::PowerSeries other{{*parse_timestamp("2030-01-01 12:00"), 5.0}};
    {
        std::ofstream os(path("other.csv"));
        eval::write_power_csv(os, other);
    }
    auto r = run({"evaluate", "--predicted", path("other.csv"), "--actual", path("actual.csv"), "--report-dir",
                  path("rep")});
    EXPECT_EQ(r.code, cli::kNoOverlap);
}

TEST_F(Cli, DivergenceExitCode) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    auto r = train({"--learning-rate", "1e6", "--epochs", "20", "--activation", "relu"});
    EXPECT_EQ(r.code, cli::kDivergence) << r.err;
    EXPECT_NE(r.err.find("epoch"), std::string::npos);
}

TEST_F(Cli, FullPipelineIsDeterministic) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    std::string first_model;
    std::string first_svg;
    for (int pass = 0; pass < 2; ++pass) {
        auto t = train({"--seed", "7", "--epochs", "5", "--hidden-layers", "8,4"});
        ASSERT_EQ(t.code, 0) << t.err;
        ASSERT_EQ(run({"predict", "--artifact-dir", path("art")}).code, 0);
        auto e = run({"evaluate", "--artifact-dir", path("art"), "--actual", path("actual.csv"), "--report-dir",
                      path("rep")});
        ASSERT_EQ(e.code, 0) << e.err;
        ASSERT_EQ(run({"report", "--report-dir", path("rep")}).code, 0);
        auto model = slurp(dir / "art" / "model.json");
        auto svg = slurp(dir / "rep" / "ape_daily.svg") + slurp(dir / "rep" / "comparison_day.svg") +
                   slurp(dir / "rep" / "comparison_month.svg");
        if (pass == 0) {
            first_model = model;
            first_svg = svg;
        } else {
            EXPECT_EQ(model, first_model);
            EXPECT_EQ(svg, first_svg);
        }
    }
    std::ifstream din(path("rep/per_day.csv"));
    EXPECT_EQ(eval::read_per_day_csv(din).size(), 7u);
}

TEST_F(Cli, ConfigFileAndOverride) {
    synth();
    ASSERT_EQ(ingest().code, 0);
    write(path("run.cfg"), "# settings\nmodel = linreg\nartifact-dir = " + path("art") + "\n");
    auto r = run({"train", "--config", path("run.cfg")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("model: linreg"), std::string::npos);
    write(path("bad.cfg"), "colour = blue\n");
    EXPECT_EQ(run({"train", "--config", path("bad.cfg")}).code, cli::kUsage);
}
