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

#ifndef NFCC_EXPERIMENT_HPP
#define NFCC_EXPERIMENT_HPP

#include "evaluation.hpp"
#include "spectrum.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nfcc
{

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Shortest-safe round-trippable decimal ("%.17g"); NaN prints as "nan".
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ExperimentSpec
{
    ScenarioConfig base;
    std::vector<std::size_t> taus;
    std::vector<double> snr_db;
    std::vector<Algorithm> algorithms{Algorithm::ncc, Algorithm::fcc, Algorithm::random};
    FeatureMethod features = FeatureMethod::projection;
    std::size_t num_seeds = 1; // seeds base.rng_seed, base.rng_seed + 1, ...
    std::string out_path;
    std::optional<std::string> chart_dir;

    void validate() const
    {
        base.validate();
        if (taus.empty() || snr_db.empty() || algorithms.empty())
            throw std::invalid_argument("ExperimentSpec: sweep lists must be non-empty");
        for (auto t : taus)
            if (t < 2 || t > base.num_uts)
                throw std::invalid_argument("ExperimentSpec: tau " + std::to_string(t) + " outside [2, K]");
        if (num_seeds < 1)
            throw std::invalid_argument("ExperimentSpec: num_seeds must be >= 1");
    }
};

namespace detail
{

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view what)
{
    T v{};
    text = trim(text);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse '" + std::string(text) + "' as a number for " + std::string(what));
    return v;
}

inline std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (!s.empty())
    {
        const auto p = s.find(',');
        const auto item = trim(s.substr(0, p));
        if (!item.empty())
            out.push_back(item);
        if (p == std::string_view::npos)
            break;
        s.remove_prefix(p + 1);
    }
    return out;
}

} // namespace detail

inline std::vector<std::size_t> parse_size_list(std::string_view s, std::string_view what)
{
    std::vector<std::size_t> v;
    for (auto item : detail::split_list(s))
        v.push_back(detail::parse_number<std::size_t>(item, what));
    return v;
}

inline std::vector<double> parse_double_list(std::string_view s, std::string_view what)
{
    std::vector<double> v;
    for (auto item : detail::split_list(s))
        v.push_back(detail::parse_number<double>(item, what));
    return v;
}

inline std::vector<Algorithm> parse_algorithm_list(std::string_view s)
{
    std::vector<Algorithm> v;
    for (auto item : detail::split_list(s))
        v.push_back(parse_algorithm(item));
    return v;
}

// Flat key = value configuration; '#' starts a comment. Unknown keys are errors.
// Sweep keys default to the single scenario value when absent.
inline ExperimentSpec parse_experiment_config(std::istream &in)
{
    ExperimentSpec spec;
    auto &c = spec.base;
    std::optional<double> snr_db;
    bool have_taus = false, have_snrs = false;

    using Setter = std::function<void(std::string_view)>;
    auto size_key = [](std::size_t &dst, const char *name) -> Setter {
        return [&dst, name](std::string_view v) { dst = detail::parse_number<std::size_t>(v, name); };
    };
    auto real_key = [](double &dst, const char *name) -> Setter {
        return [&dst, name](std::string_view v) { dst = detail::parse_number<double>(v, name); };
    };
    const std::map<std::string, Setter, std::less<>> keys{
        {"carrier_frequency_hz", real_key(c.carrier_frequency_hz, "carrier_frequency_hz")},
        {"num_antennas", size_key(c.num_antennas, "num_antennas")},
        {"antenna_spacing_m", [&](std::string_view v) { c.antenna_spacing_m = detail::parse_number<double>(v, "antenna_spacing_m"); }},
        {"num_uts", size_key(c.num_uts, "num_uts")},
        {"num_paths", size_key(c.num_paths, "num_paths")},
        {"paths_detected", size_key(c.paths_detected, "paths_detected")},
        {"num_distance_samples", size_key(c.num_distance_samples, "num_distance_samples")},
        {"beta_delta", real_key(c.beta_delta, "beta_delta")},
        {"num_covariance_draws", size_key(c.num_covariance_draws, "num_covariance_draws")},
        {"chart_dimension", size_key(c.chart_dimension, "chart_dimension")},
        {"pilot_length", size_key(c.pilot_length, "pilot_length")},
        {"snr_db", [&](std::string_view v) { snr_db = detail::parse_number<double>(v, "snr_db"); }},
        {"rng_seed", [&](std::string_view v) { c.rng_seed = detail::parse_number<std::uint64_t>(v, "rng_seed"); }},
        {"ut_angle_min_rad", real_key(c.ut_angle_range_rad.lo, "ut_angle_min_rad")},
        {"ut_angle_max_rad", real_key(c.ut_angle_range_rad.hi, "ut_angle_max_rad")},
        {"ut_distance_min_m", real_key(c.ut_distance_range_m.lo, "ut_distance_min_m")},
        {"ut_distance_max_m", real_key(c.ut_distance_range_m.hi, "ut_distance_max_m")},
        {"angular_dispersion_rad", real_key(c.angular_dispersion_rad, "angular_dispersion_rad")},
        {"distance_dispersion", real_key(c.distance_dispersion, "distance_dispersion")},
        {"pathloss_exponent", real_key(c.pathloss_exponent, "pathloss_exponent")},
        {"k_neighbors", size_key(c.k_neighbors, "k_neighbors")},
        {"rate_trials", size_key(c.rate_trials, "rate_trials")},
        {"sweep_tau", [&](std::string_view v) { spec.taus = parse_size_list(v, "sweep_tau"); have_taus = true; }},
        {"sweep_snr_db", [&](std::string_view v) { spec.snr_db = parse_double_list(v, "sweep_snr_db"); have_snrs = true; }},
        {"algorithms", [&](std::string_view v) { spec.algorithms = parse_algorithm_list(v); }},
        {"feature_method", [&](std::string_view v) { spec.features = parse_feature_method(v); }},
        {"num_seeds", size_key(spec.num_seeds, "num_seeds")},
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string_view sv = line;
        if (const auto hash = sv.find('#'); hash != std::string_view::npos)
            sv = sv.substr(0, hash);
        sv = detail::trim(sv);
        if (sv.empty())
            continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(sv.substr(0, eq));
        const auto value = detail::trim(sv.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" +
                                        std::string(key) + "'");
        try
        {
            it->second(value);
        }
        catch (const std::invalid_argument &e)
        {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (snr_db)
        c.snr = db_to_linear(*snr_db);
    if (!have_taus)
        spec.taus = {c.pilot_length};
    if (!have_snrs)
        spec.snr_db = {10.0 * std::log10(c.snr)};
    return spec;
}

inline ExperimentSpec load_experiment_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_experiment_config(in);
}

// Everything that depends on the seed only: geometry, channels, features and both charts.
struct Scene
{
    std::uint64_t seed = 0;
    UtGeometry geometry;
    ChannelSet channels;
    FeatureSet features;
    std::vector<RVector> farfield; // DFT-domain spectra r_k, input of the far-field chart
    ChartCoordinates ncc_chart;
    ChartCoordinates fcc_chart;
    ChartQuality ncc_quality;
    ChartQuality fcc_quality;
};

namespace stream
{
inline constexpr std::uint64_t geometry = 1;
inline constexpr std::uint64_t channels = 2;
inline constexpr std::uint64_t assignment = 3;
inline constexpr std::uint64_t rate = 4;
} // namespace stream

inline std::size_t neighbors_for(const ScenarioConfig &config)
{
    return config.k_neighbors ? config.k_neighbors : default_neighbors(config.num_uts);
}

inline Scene prepare_scene(const ScenarioConfig &config, std::uint64_t seed, FeatureMethod method,
                           const PolarCodebook &codebook, const CMatrix &dft)
{
    Scene sc;
    sc.seed = seed;
    Rng geo_rng(derive_seed(seed, {stream::geometry}));
    sc.geometry = place_uts(config, geo_rng);
    Rng ch_rng(derive_seed(seed, {stream::channels}));
    sc.channels = synthesize_channels(sc.geometry, config, ch_rng);

    sc.features = method == FeatureMethod::projection ? polar_projection_spectrum(sc.channels, codebook)
                                                      : somp_spectrum(sc.channels, codebook, config.paths_detected);
    sc.farfield = farfield_spectrum(sc.channels, dft);

    const std::size_t k = neighbors_for(config);
    sc.ncc_chart = isomap_embed(dissimilarity(sc.features.vectorized(), FeatureKind::near_field),
                                config.chart_dimension, k);
    sc.fcc_chart = isomap_embed(dissimilarity(sc.farfield, FeatureKind::far_field), config.chart_dimension, k);

    const RMatrix truth = sc.geometry.true_positions();
    sc.ncc_quality = chart_quality(sc.ncc_chart.coords, truth);
    sc.fcc_quality = chart_quality(sc.fcc_chart.coords, truth);
    return sc;
}

inline Scene prepare_scene(const ScenarioConfig &config, std::uint64_t seed, FeatureMethod method)
{
    return prepare_scene(config, seed, method, build_polar_codebook(config), build_dft_codebook(config.num_antennas));
}

struct ResultRow
{
    std::uint64_t seed = 0;
    std::size_t tau = 0;
    double snr_db = 0.0;
    Algorithm algorithm = Algorithm::ncc;
    FeatureMethod features = FeatureMethod::projection;
    double sum_mse = std::numeric_limits<double>::quiet_NaN();
    double sum_rate = std::numeric_limits<double>::quiet_NaN();
    double p1_objective = std::numeric_limits<double>::quiet_NaN();
    double chart_spearman = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string error;
};

struct AggregateRow
{
    std::size_t tau = 0;
    double snr_db = 0.0;
    Algorithm algorithm = Algorithm::ncc;
    FeatureMethod features = FeatureMethod::projection;
    std::size_t count = 0;
    double mean[4]{};   // sum_mse, sum_rate, p1_objective, chart_spearman
    double stderr_[4]{};
};

struct ResultTable
{
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;

    const AggregateRow *find(std::size_t tau, double snr_db, Algorithm a) const
    {
        for (const auto &r : aggregates)
            if (r.tau == tau && r.snr_db == snr_db && r.algorithm == a)
                return &r;
        return nullptr;
    }
};

// Allocation and evaluation of one sweep cell on a prepared scene.
inline ResultRow evaluate_cell(const Scene &sc, const ScenarioConfig &config, std::size_t tau, double snr_db,
                               Algorithm algorithm, FeatureMethod method)
{
    ResultRow row;
    row.seed = sc.seed;
    row.tau = tau;
    row.snr_db = snr_db;
    row.algorithm = algorithm;
    row.features = method;

    const std::uint64_t cell = derive_seed(sc.seed, {tau, double_tag(snr_db), static_cast<std::uint64_t>(algorithm)});
    PilotAssignment pa;
    switch (algorithm)
    {
    case Algorithm::ncc:
        pa = ncc_pa(sc.ncc_chart, tau);
        row.chart_spearman = sc.ncc_quality.spearman.value_or(std::numeric_limits<double>::quiet_NaN());
        break;
    case Algorithm::fcc:
        pa = fcc_pa(sc.fcc_chart, tau);
        row.chart_spearman = sc.fcc_quality.spearman.value_or(std::numeric_limits<double>::quiet_NaN());
        break;
    case Algorithm::random: {
        Rng rng(derive_seed(cell, {stream::assignment}));
        pa = random_pa(sc.channels.num_uts(), tau, rng);
        break;
    }
    }
    const double zeta = db_to_linear(snr_db);
    row.sum_mse = closed_form_mse(pa, sc.channels.covariances, zeta, tau).sum_mse;
    Rng rate_rng(derive_seed(cell, {stream::rate}));
    row.sum_rate = sum_rate(pa, sc.channels, zeta, tau, config.rate_trials, rate_rng);
    row.p1_objective = p1_objective(pa, sc.channels.covariances);
    row.ok = true;
    return row;
}

namespace detail
{

inline void mean_stderr(const std::vector<double> &v, double &mean, double &se)
{
    mean = se = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    for (double d : v)
        if (!std::isnan(d))
            x.push_back(d);
    if (x.empty())
        return;
    double s = 0.0;
    for (double d : x)
        s += d;
    mean = s / static_cast<double>(x.size());
    if (x.size() < 2)
        return;
    double ss = 0.0;
    for (double d : x)
        ss += (d - mean) * (d - mean);
    se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

} // namespace detail

inline std::vector<AggregateRow> aggregate(const ExperimentSpec &spec, const std::vector<ResultRow> &rows)
{
    std::vector<AggregateRow> out;
    for (auto tau : spec.taus)
        for (double snr : spec.snr_db)
            for (auto alg : spec.algorithms)
            {
                AggregateRow a;
                a.tau = tau;
                a.snr_db = snr;
                a.algorithm = alg;
                a.features = spec.features;
                std::vector<double> cols[4];
                for (const auto &r : rows)
                    if (r.ok && r.tau == tau && r.snr_db == snr && r.algorithm == alg)
                    {
                        ++a.count;
                        cols[0].push_back(r.sum_mse);
                        cols[1].push_back(r.sum_rate);
                        cols[2].push_back(r.p1_objective);
                        cols[3].push_back(r.chart_spearman);
                    }
                for (int i = 0; i < 4; ++i)
                    detail::mean_stderr(cols[i], a.mean[i], a.stderr_[i]);
                out.push_back(a);
            }
    return out;
}

// Runs every (seed, tau, snr, algorithm) cell. Seed-level failures mark all of that
// seed's rows as failed; the run always continues. `on_scene` sees every prepared scene.
inline ResultTable run_experiment(const ExperimentSpec &spec,
                                  const std::function<void(const Scene &)> &on_scene = {})
{
    spec.validate();
    const PolarCodebook codebook = build_polar_codebook(spec.base);
    const CMatrix dft = build_dft_codebook(spec.base.num_antennas);

    ResultTable table;
    for (std::size_t i = 0; i < spec.num_seeds; ++i)
    {
        const std::uint64_t seed = spec.base.rng_seed + i;
        std::optional<Scene> scene;
        std::string scene_error;
        try
        {
            scene = prepare_scene(spec.base, seed, spec.features, codebook, dft);
            if (on_scene)
                on_scene(*scene);
        }
        catch (const std::exception &e)
        {
            scene_error = e.what();
        }
        for (auto tau : spec.taus)
            for (double snr : spec.snr_db)
                for (auto alg : spec.algorithms)
                {
                    ResultRow row;
                    if (scene)
                    {
                        try
                        {
                            row = evaluate_cell(*scene, spec.base, tau, snr, alg, spec.features);
                        }
                        catch (const std::exception &e)
                        {
                            row.error = e.what();
                        }
                    }
                    else
                        row.error = scene_error;
                    row.seed = seed;
                    row.tau = tau;
                    row.snr_db = snr;
                    row.algorithm = alg;
                    row.features = spec.features;
                    table.rows.push_back(std::move(row));
                }
    }
    table.aggregates = aggregate(spec, table.rows);
    return table;
}

inline constexpr std::string_view results_header =
    "seed,tau,snr_db,algorithm,feature_method,sum_mse,sum_rate,p1_objective,chart_spearman,status,message";

namespace detail
{

// Keeps CSV cells on one line without quoting rules.
inline std::string csv_safe(std::string s)
{
    for (auto &ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r')
            ch = ';';
    return s;
}

} // namespace detail

// One row per cell, then per (tau, snr, algorithm) a "mean" and a "stderr" row over the
// successful seeds (message column holds n=<count>).
inline void write_results_csv(const ResultTable &t, std::ostream &os)
{
    os << results_header << '\n';
    for (const auto &r : t.rows)
        os << r.seed << ',' << r.tau << ',' << format_number(r.snr_db) << ',' << to_string(r.algorithm) << ','
           << to_string(r.features) << ',' << format_number(r.sum_mse) << ',' << format_number(r.sum_rate) << ','
           << format_number(r.p1_objective) << ',' << format_number(r.chart_spearman) << ','
           << (r.ok ? "ok" : "failed") << ',' << detail::csv_safe(r.error) << '\n';
    for (const auto &a : t.aggregates)
        for (int kind = 0; kind < 2; ++kind)
        {
            const double *v = kind == 0 ? a.mean : a.stderr_;
            os << (kind == 0 ? "mean" : "stderr") << ',' << a.tau << ',' << format_number(a.snr_db) << ','
               << to_string(a.algorithm) << ',' << to_string(a.features);
            for (int i = 0; i < 4; ++i)
                os << ',' << format_number(v[i]);
            os << ",aggregate,n=" << a.count << '\n';
        }
}

inline std::string chart_header(std::size_t D)
{
    std::string h = "ut_id,true_x,true_y";
    for (std::size_t d = 1; d <= D; ++d)
        h += ",c_" + std::to_string(d);
    return h;
}

inline void write_chart_csv(const ChartCoordinates &chart, const UtGeometry &geometry, std::ostream &os)
{
    if (static_cast<std::size_t>(chart.size()) != geometry.num_uts())
        throw std::invalid_argument("export_chart: chart and geometry UT counts differ");
    const RMatrix truth = geometry.true_positions();
    os << chart_header(static_cast<std::size_t>(chart.dimension())) << '\n';
    for (Eigen::Index k = 0; k < chart.size(); ++k)
    {
        os << k << ',' << format_number(truth(0, k)) << ',' << format_number(truth(1, k));
        for (Eigen::Index d = 0; d < chart.dimension(); ++d)
            os << ',' << format_number(chart.coords(d, k));
        os << '\n';
    }
}

inline void export_chart(const ChartCoordinates &chart, const UtGeometry &geometry, const std::string &path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("export_chart: cannot write '" + path + "'");
    write_chart_csv(chart, geometry, os);
    if (!os)
        throw std::runtime_error("export_chart: write to '" + path + "' failed");
}

struct ChartFile
{
    RMatrix true_positions; // 2 x K
    RMatrix coords;         // D x K
};

inline ChartFile read_chart_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("read_chart_csv: empty input");
    const auto cols = detail::split_list(line).size();
    if (cols < 4)
        throw std::invalid_argument("read_chart_csv: header needs at least one chart coordinate");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line))
    {
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split_list(line);
        if (cells.size() != cols)
            throw std::invalid_argument("read_chart_csv: ragged row");
        std::vector<double> r;
        for (auto c : cells)
            r.push_back(detail::parse_number<double>(c, "chart cell"));
        rows.push_back(std::move(r));
    }
    ChartFile f;
    const auto K = static_cast<Eigen::Index>(rows.size());
    const auto D = static_cast<Eigen::Index>(cols - 3);
    f.true_positions.resize(2, K);
    f.coords.resize(D, K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const auto &r = rows[static_cast<std::size_t>(k)];
        f.true_positions(0, k) = r[1];
        f.true_positions(1, k) = r[2];
        for (Eigen::Index d = 0; d < D; ++d)
            f.coords(d, k) = r[static_cast<std::size_t>(3 + d)];
    }
    return f;
}

// "ut_id,pilot_id" lines, 0-based.
inline void write_assignment_csv(const PilotAssignment &a, std::ostream &os)
{
    os << "ut_id,pilot_id\n";
    const auto p = a.pilot_of();
    for (std::size_t k = 0; k < p.size(); ++k)
        os << k << ',' << p[k] << '\n';
}

// Covariance dump. After a '#' comment line, each line holds one matrix row:
//   ut_id,row,re(0),im(0),re(1),im(1),...,re(M-1),im(M-1)
inline void write_covariances_csv(const std::vector<CMatrix> &covariances, std::ostream &os)
{
    const Eigen::Index M = covariances.empty() ? 0 : covariances.front().rows();
    os << "# covariance dump: K=" << covariances.size() << " M=" << M
       << "; columns ut_id,row then interleaved re,im of the row entries (row-major)\n";
    for (std::size_t k = 0; k < covariances.size(); ++k)
        for (Eigen::Index i = 0; i < covariances[k].rows(); ++i)
        {
            os << k << ',' << i;
            for (Eigen::Index j = 0; j < covariances[k].cols(); ++j)
                os << ',' << format_number(covariances[k](i, j).real()) << ','
                   << format_number(covariances[k](i, j).imag());
            os << '\n';
        }
}

// Polar spectrum dump: one line per (UT, angle index) with the S ring powers.
inline void write_spectrum_csv(const FeatureSet &fs, std::ostream &os)
{
    const Eigen::Index S = fs.polar.empty() ? 0 : fs.polar.front().cols();
    os << "ut_id,m";
    for (Eigen::Index s = 1; s <= S; ++s)
        os << ",gamma_s" << s;
    os << '\n';
    for (std::size_t k = 0; k < fs.polar.size(); ++k)
        for (Eigen::Index m = 0; m < fs.polar[k].rows(); ++m)
        {
            os << k << ',' << m;
            for (Eigen::Index s = 0; s < fs.polar[k].cols(); ++s)
                os << ',' << format_number(fs.polar[k](m, s));
            os << '\n';
        }
}

} // namespace nfcc

#endif
