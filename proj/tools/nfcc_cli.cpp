// SPDX-License-Identifier: Apache-2.0
//
// nfcc: near-field channel charting and pilot allocation for XL-MIMO
// Copyright (C) 2026 The nfcc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// nfcc_cli: experiment runner. Writes the result table as CSV and, on request,
// chart coordinates, covariances and polar spectra per seed.

#include <nfcc/nfcc.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace nfcc;

namespace
{

void report_error(const std::string &kind, const std::string &message)
{
    std::cerr << nlohmann::ordered_json{{"status", "error"}, {"kind", kind}, {"message", message}}.dump() << '\n';
}

std::ofstream open_output(const fs::path &path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

void ensure_dir(const std::optional<std::string> &dir)
{
    if (dir)
        fs::create_directories(*dir);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Near-field channel charting and pilot allocation experiments"};
    app.option_defaults()->always_capture_default();

    std::optional<std::string> config_path, sweep_tau, sweep_snr, algos, features, covariance_dir, spectrum_dir,
        chart_dir;
    std::optional<std::size_t> seeds;
    std::string out = "-";
    app.add_option("--config", config_path, "key = value configuration file (full-scale defaults when omitted)")
        ->check(CLI::ExistingFile);
    app.add_option("--sweep-tau", sweep_tau, "comma-separated pilot lengths");
    app.add_option("--sweep-snr-db", sweep_snr, "comma-separated SNR values in dB");
    app.add_option("--algos", algos, "comma-separated subset of ncc,fcc,random");
    app.add_option("--features", features, "polar feature method")->check(CLI::IsMember({"projection", "somp"}));
    app.add_option("--seeds", seeds, "number of seeds (rng_seed, rng_seed+1, ...)")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "result CSV path, '-' for stdout");
    app.add_option("--export-charts", chart_dir, "directory for chart_seed<N>_{ncc,fcc}.csv");
    app.add_option("--dump-covariances", covariance_dir, "directory for covariances_seed<N>.csv");
    app.add_option("--dump-spectra", spectrum_dir, "directory for spectrum_seed<N>.csv");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        report_error("usage", e.what());
        return 2;
    }

    try
    {
        ExperimentSpec spec;
        if (config_path)
            spec = load_experiment_config(*config_path);
        else
        {
            spec.base = ScenarioConfig::full_scale();
            spec.taus = {spec.base.pilot_length};
            spec.snr_db = {10.0 * std::log10(spec.base.snr)};
        }
        if (sweep_tau)
            spec.taus = parse_size_list(*sweep_tau, "--sweep-tau");
        if (sweep_snr)
            spec.snr_db = parse_double_list(*sweep_snr, "--sweep-snr-db");
        if (algos)
            spec.algorithms = parse_algorithm_list(*algos);
        if (features)
            spec.features = parse_feature_method(*features);
        if (seeds)
            spec.num_seeds = *seeds;
        spec.out_path = out;
        spec.chart_dir = chart_dir;
        spec.validate();

        ensure_dir(chart_dir);
        ensure_dir(covariance_dir);
        ensure_dir(spectrum_dir);

        const auto table = run_experiment(spec, [&](const Scene &sc) {
            const std::string stem = "seed" + std::to_string(sc.seed);
            if (chart_dir)
            {
                export_chart(sc.ncc_chart, sc.geometry, (fs::path(*chart_dir) / ("chart_" + stem + "_ncc.csv")).string());
                export_chart(sc.fcc_chart, sc.geometry, (fs::path(*chart_dir) / ("chart_" + stem + "_fcc.csv")).string());
            }
            if (covariance_dir)
            {
                auto os = open_output(fs::path(*covariance_dir) / ("covariances_" + stem + ".csv"));
                write_covariances_csv(sc.channels.covariances, os);
            }
            if (spectrum_dir)
            {
                auto os = open_output(fs::path(*spectrum_dir) / ("spectrum_" + stem + ".csv"));
                write_spectrum_csv(sc.features, os);
            }
        });

        if (out == "-")
            write_results_csv(table, std::cout);
        else
        {
            auto os = open_output(out);
            write_results_csv(table, os);
            if (!os.flush())
                throw std::runtime_error("write to '" + out + "' failed");
        }

        const auto failed = static_cast<std::size_t>(
            std::count_if(table.rows.begin(), table.rows.end(), [](const ResultRow &r) { return !r.ok; }));
        if (failed > 0)
            std::cerr << nlohmann::ordered_json{{"status", "warning"}, {"failed_rows", failed}, {"rows", table.rows.size()}}.dump()
                      << '\n';
        return 0;
    }
    catch (const std::invalid_argument &e)
    {
        report_error("config", e.what());
    }
    catch (const std::exception &e)
    {
        report_error("runtime", e.what());
    }
    return 1;
}
