#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "neucogar/neucogar.hpp"
#include "acceptance.hpp"

using namespace neucogar;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "neucogar_tests" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

ExperimentConfig short_config() {
    ExperimentConfig c;
    c.duration_ms = 600.0;
    return c;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream s(line);
        std::string f;
        while (std::getline(s, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST(Harness, BurstRaisesThalamusAndGivesFear) {
    const auto r = run_experiment(short_config()).report;
    EXPECT_TRUE(r.burst);
    EXPECT_GT(r.rates("Thalamus").ratio, 1.0);
    EXPECT_GT(r.effect.monoamines.dopamine, 0.5);
    EXPECT_DOUBLE_EQ(r.effect.monoamines.serotonin, 0.2);
    EXPECT_DOUBLE_EQ(r.effect.monoamines.noradrenaline, 0.7);
    EXPECT_EQ(r.effect.affect, AffectLabel::FearTerror);
    EXPECT_NE(r.baseline.affect, AffectLabel::FearTerror);
}

TEST(Harness, NoBurstKeepsThalamusSteady) {
    auto c = short_config();
    c.burst.reset();
    const auto r = run_experiment(c).report;
    EXPECT_FALSE(r.burst);
    EXPECT_TRUE(acceptance::in_band(r.rates("Thalamus").ratio)) << r.rates("Thalamus").ratio;
    EXPECT_LT(r.effect.monoamines.dopamine, 0.5);
    EXPECT_NE(r.effect.affect, AffectLabel::FearTerror);
}

TEST(Harness, PeakDopamineInWindow) {
    DopamineTrace t{0.2, {DopamineBurst{400.0, 0.6, 50.0}}};
    EXPECT_NEAR(peak_dopamine(t, {400.0, 550.0}, 0.1), 0.8, 1e-12);
    EXPECT_NEAR(peak_dopamine(t, {100.0, 400.0}, 0.1), 0.2, 1e-12);
}

TEST(Harness, WritesAllOutputs) {
    const auto dir = scratch("outputs");
    const auto c = short_config();
    const auto r = run_experiment(c);
    const auto files = write_outputs(r.report, r.record, r.network, dir, c.rate_bin_ms);
    for (const auto& p : {files.raster, files.rates, files.report, files.topology}) {
        EXPECT_TRUE(std::filesystem::exists(p)) << p;
    }
    EXPECT_EQ(read_csv(files.raster).front(), (std::vector<std::string>{"t_ms", "population", "neuron"}));
    EXPECT_EQ(read_csv(files.rates).front(),
              (std::vector<std::string>{"bin_start_ms", "population", "rate_hz"}));
    EXPECT_EQ(read_csv(files.topology).front(),
              (std::vector<std::string>{"source", "target", "receptor", "rule", "weight", "delay"}));
    EXPECT_EQ(read_csv(files.topology).size(), 1u + 12u);
}

TEST(Harness, EmptyRecordGivesHeaderOnlyRaster) {
    EXPECT_EQ(raster_csv(SpikeRecord{}), "t_ms,population,neuron\n");
    std::istringstream in(raster_csv(SpikeRecord{}));
    EXPECT_TRUE(parse_raster_csv(in).empty());
}

TEST(Harness, ReportRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto r = run_experiment(short_config());
    const auto files = write_outputs(r.report, r.record, r.network, dir);
    EXPECT_EQ(read_report(files.report), r.report);
    EXPECT_EQ(report_from_json(nlohmann::ordered_json::parse(report_json(r.report))), r.report);
}

TEST(Harness, ReportKeyOrderIsStable) {
    const auto r = run_experiment(short_config()).report;
    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    ASSERT_FALSE(keys.empty());
    EXPECT_EQ(keys.front(), "schema");
    EXPECT_EQ(report_json(r), report_json(report_from_json(j)));
}

TEST(Harness, ReadReportErrorsCarryPath) {
    const auto dir = scratch("badreport");
    std::filesystem::create_directories(dir);
    const auto path = dir / "report.json";
    std::ofstream(path) << "{ not json";
    try {
        read_report(path);
        FAIL() << "expected an error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("report.json"), std::string::npos);
    }
    EXPECT_THROW(read_report(dir / "missing.json"), std::runtime_error);
}

TEST(Harness, RatesRecountMatchesRaster) {
    const auto dir = scratch("recount");
    auto c = short_config();
    c.extra_recorders = {"Cortex", "GPe"};
    const auto r = run_experiment(c);
    const auto files = write_outputs(r.report, r.record, r.network, dir, c.rate_bin_ms);

    std::map<std::string, double> from_rates;
    const auto rates = read_csv(files.rates);
    for (std::size_t i = 1; i < rates.size(); ++i) {
        const double size = static_cast<double>(r.record.find(rates[i][1])->size);
        from_rates[rates[i][1]] += std::stod(rates[i][2]) * c.rate_bin_ms / 1000.0 * size;
    }
    std::map<std::string, double> from_raster;
    const auto raster = read_csv(files.raster);
    for (std::size_t i = 1; i < raster.size(); ++i) from_raster[raster[i][1]] += 1.0;
    // The raster may hold a spike stamped exactly at t_end, which no bin covers.
    std::map<std::string, double> at_end;
    for (const auto& e : r.record.events) {
        if (std::abs(r.record.time_of(e) - r.record.t_end) < 1e-9) at_end[r.record.find(e.population)->name] += 1.0;
    }
    ASSERT_EQ(from_rates.size(), 4u);
    for (const auto& [name, n] : from_rates) {
        EXPECT_NEAR(n, from_raster[name] - at_end[name], 1e-3) << name;
    }
}

TEST(Harness, RerunsAreByteIdentical) {
    const auto c = short_config();
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    EXPECT_EQ(raster_csv(a.record), raster_csv(b.record));
    EXPECT_EQ(report_json(a.report), report_json(b.report));
    EXPECT_EQ(topology_csv(a.network), topology_csv(b.network));
}

TEST(Harness, BurstAndNoBurstIdenticalBeforeOnset) {
    auto c = short_config();
    c.extra_recorders.assign(kCircuitPopulations.begin(), kCircuitPopulations.end());
    const auto burst = run_experiment(c).record;
    c.burst.reset();
    const auto flat = run_experiment(c).record;
    auto before = [](const SpikeRecord& r) {
        std::vector<SpikeEvent> out;
        for (const auto& e : r.events) {
            if (r.time_of(e) < 400.0) out.push_back(e);
        }
        return out;
    };
    EXPECT_FALSE(before(burst).empty());
    EXPECT_EQ(before(burst), before(flat));
    EXPECT_NE(burst.events, flat.events);
}

TEST(Harness, ValidationRunsBeforeSimulation) {
    auto c = short_config();
    c.effect = {300.0, 450.0};  // starts before the burst
    EXPECT_THROW(run_experiment(c), std::invalid_argument);
    c = short_config();
    c.baseline = {100.0, 700.0};  // past the end
    EXPECT_THROW(run_experiment(c), std::invalid_argument);
    c = short_config();
    c.extra_recorders = {"Hippocampus"};
    EXPECT_THROW(run_experiment(c), std::invalid_argument);
    c = short_config();
    c.serotonin = 1.5;
    EXPECT_THROW(run_experiment(c), std::invalid_argument);
}

TEST(Harness, ExactFormattingRoundTrips) {
    EXPECT_EQ(detail::format_exact(100.0), "100");
    EXPECT_EQ(detail::format_exact(-250.0), "-250");
    EXPECT_EQ(detail::format_exact(0.1), "0.1");
    for (double x : {1.0 / 3.0, 1e-7, 12345.678, -0.0625}) {
        EXPECT_EQ(std::stod(detail::format_exact(x)), x);
    }
}
