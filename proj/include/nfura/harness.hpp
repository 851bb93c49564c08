// SPDX-License-Identifier: Apache-2.0
//
// nfura - near-field unsourced random access simulation toolkit
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

#ifndef NFURA_HARNESS_HPP
#define NFURA_HARNESS_HPP

#include "array_geometry.hpp"
#include "metrics.hpp"
#include "offgrid_refine.hpp"
#include "polar_dictionary.hpp"
#include "sparse_recovery.hpp"
#include "stitch_cluster.hpp"
#include "ura_codec.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

// Monte Carlo driver: scenario configuration, one URA frame per trial, sweeps and CSV output.

namespace nfura
{

struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class DecoderKind
{
    turbo,
    nturbo,
    somp,
    twostage
};

enum class Stage
{
    ura,  // full frame: S slots, clustering, message-level P_e
    jadce // one slot, P_e over the detected codeword set
};

inline std::string_view to_string(DecoderKind d)
{
    switch (d)
    {
    case DecoderKind::turbo:
        return "turbo";
    case DecoderKind::nturbo:
        return "nturbo";
    case DecoderKind::somp:
        return "somp";
    case DecoderKind::twostage:
        return "twostage";
    }
    return "unknown";
}

inline DecoderKind decoder_from_string(std::string_view s)
{
    if (s == "turbo")
        return DecoderKind::turbo;
    if (s == "nturbo")
        return DecoderKind::nturbo;
    if (s == "somp")
        return DecoderKind::somp;
    if (s == "twostage")
        return DecoderKind::twostage;
    throw ConfigError("unknown decoder: " + std::string(s));
}

struct ScenarioConfig
{
    int m_antennas = 64;
    double carrier_hz = 3e9;
    int k_a = 20;
    int l_paths = 2;
    double d_min = 10.0;
    double d_max = 20.0;
    int n_block = 16;
    int j_bits = 10;
    int s_slots = 4;
    std::vector<double> snr_db{10.0};
    DictionaryKind dictionary = DictionaryKind::polar_proposed;
    double gamma = 0.5816;
    double beta = 1.2;
    DecoderKind decoder = DecoderKind::turbo;
    Stage stage = Stage::ura;
    Field field = Field::near;
    bool on_grid = false;          // plant paths exactly on dictionary atoms
    int seeds = 100;
    std::uint64_t base_seed = 1;
    int k_max = 0;                 // decoder row sparsity; 0 uses k_a
    int r_sparsity = 0;            // 0 uses 2 k_a L
    int row_sparsity = 0;          // two-stage OMP atoms per row; 0 uses 2 L
    int max_iters = 50;
    int t_local = 3;
    int t_cyclic = 3;
    double upsilon = 0.1;
    bool upsilon_absolute = false;
    double ls_ridge = 0.0;         // see RecoveryConfig::ridge
    bool debias = false;           // see RecoveryConfig::debias
    double tau_scale = 5.0;        // tau^2 = ||Y||^2 / (tau_scale (SNR + 1))
    bool collision_handling = true;
    int max_sweeps = 20;
    bool timing = false;

    int b_bits() const { return s_slots * j_bits; }
    ArrayConfig array() const { return ArrayConfig::from_carrier(m_antennas, carrier_hz); }
    int decoder_k() const { return k_max > 0 ? k_max : k_a; }
    int decoder_r() const { return r_sparsity > 0 ? r_sparsity : 2 * decoder_k() * l_paths; }
    int decoder_row_sparsity() const { return row_sparsity > 0 ? row_sparsity : 2 * l_paths; }

    void validate() const
    {
        const auto need = [](bool ok, const char *msg) {
            if (!ok)
                throw ConfigError(msg);
        };
        need(m_antennas >= 2, "m_antennas must be at least 2");
        need(carrier_hz > 0.0, "carrier_hz must be positive");
        need(k_a >= 1 && l_paths >= 1, "k_a and l_paths must be positive");
        need(n_block >= 1, "n_block must be positive");
        need(j_bits >= 1 && j_bits <= 20, "j_bits must lie in [1, 20]");
        need(s_slots >= 1, "s_slots must be positive");
        need(stage == Stage::jadce || s_slots >= 2, "the ura stage needs at least two slots");
        need(!snr_db.empty(), "snr_db list is empty");
        need(seeds >= 1, "seeds must be positive");
        need(max_iters >= 1 && max_sweeps >= 1, "iteration caps must be positive");
        need(t_local >= 0 && t_cyclic >= 0, "refinement rounds must be non-negative");
        need(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
        need(beta > 0.0, "beta must be positive");
        need(upsilon >= 0.0, "upsilon must be non-negative");
        need(ls_ridge >= 0.0, "ls_ridge must be non-negative");
        need(tau_scale > 0.0, "tau_scale must be positive");
        need(d_min > 0.0 && d_max >= d_min, "distance range must satisfy 0 < d_min <= d_max");
        if (field == Field::near && !on_grid)
        {
            const ArrayConfig arr = array();
            need(d_min > arr.fresnel_distance() && d_max < arr.rayleigh_distance(),
                 "near-field distance range must lie inside (fresnel, rayleigh)");
        }
    }

    void set(const std::string &key, const std::string &value);
};

namespace detail
{
inline std::string trim(std::string s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T> T parse_number(const std::string &key, const std::string &v)
{
    T out{};
    const auto *end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("invalid value for " + key + ": '" + v + "'");
    return out;
}

inline double parse_double(const std::string &key, const std::string &v)
{
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    return parse_number<double>(key, v);
}

inline bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "1" || v == "true" || v == "on" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "off" || v == "no")
        return false;
    throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string &v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}
} // namespace detail

inline void ScenarioConfig::set(const std::string &key, const std::string &value)
{
    using namespace detail;
    const std::string v = trim(value);
    const auto as_int = [&] { return parse_number<int>(key, v); };
    const auto as_double = [&] { return parse_double(key, v); };
    if (key == "m_antennas")
        m_antennas = as_int();
    else if (key == "carrier_hz")
        carrier_hz = as_double();
    else if (key == "k_a")
        k_a = as_int();
    else if (key == "l_paths")
        l_paths = as_int();
    else if (key == "distance_range")
    {
        const auto parts = split_list(v);
        if (parts.size() != 2)
            throw ConfigError("distance_range needs two comma-separated values");
        d_min = parse_double(key, parts[0]);
        d_max = parse_double(key, parts[1]);
    }
    else if (key == "n_block")
        n_block = as_int();
    else if (key == "j_bits")
        j_bits = as_int();
    else if (key == "s_slots")
        s_slots = as_int();
    else if (key == "snr_db")
    {
        snr_db.clear();
        for (const auto &s : split_list(v))
            snr_db.push_back(parse_double(key, s));
    }
    else if (key == "dictionary")
    {
        try
        {
            dictionary = dictionary_kind_from_string(v);
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
    }
    else if (key == "gamma")
        gamma = as_double();
    else if (key == "beta")
        beta = as_double();
    else if (key == "decoder")
        decoder = decoder_from_string(v);
    else if (key == "stage")
    {
        if (v == "ura")
            stage = Stage::ura;
        else if (v == "jadce")
            stage = Stage::jadce;
        else
            throw ConfigError("stage must be ura or jadce");
    }
    else if (key == "field")
    {
        if (v == "near")
            field = Field::near;
        else if (v == "far")
            field = Field::far;
        else
            throw ConfigError("field must be near or far");
    }
    else if (key == "on_grid")
        on_grid = parse_bool(key, v);
    else if (key == "seeds")
        seeds = as_int();
    else if (key == "base_seed")
        base_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "k_max")
        k_max = as_int();
    else if (key == "r_sparsity")
        r_sparsity = as_int();
    else if (key == "row_sparsity")
        row_sparsity = as_int();
    else if (key == "max_iters")
        max_iters = as_int();
    else if (key == "t_local")
        t_local = as_int();
    else if (key == "t_cyclic")
        t_cyclic = as_int();
    else if (key == "upsilon")
        upsilon = as_double();
    else if (key == "upsilon_mode")
    {
        if (v != "relative" && v != "absolute")
            throw ConfigError("upsilon_mode must be relative or absolute");
        upsilon_absolute = v == "absolute";
    }
    else if (key == "ls_ridge")
        ls_ridge = as_double();
    else if (key == "debias")
        debias = parse_bool(key, v);
    else if (key == "tau_scale")
        tau_scale = as_double();
    else if (key == "collision_handling")
        collision_handling = parse_bool(key, v);
    else if (key == "max_sweeps")
        max_sweeps = as_int();
    else if (key == "timing")
        timing = parse_bool(key, v);
    else
        throw ConfigError("unknown configuration key: " + key);
}

/// key=value lines, '#' starts a comment.
inline ScenarioConfig parse_config(std::istream &in, ScenarioConfig cfg = {})
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        cfg.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

/// Output of one slot decode in a decoder-independent form.
struct SlotDecode
{
    std::vector<int> active;       // detected codebook columns, ascending
    std::map<int, CVec> rows;      // spatial estimates for (at least) the active columns
    int iterations = 0;
    bool converged = true;
};

/// Decoder settings of a scenario for one received block.
inline RecoveryConfig recovery_config(const ScenarioConfig &cfg, const CMat &Y, double snr_db)
{
    RecoveryConfig rc;
    rc.k_a = cfg.decoder_k();
    rc.r_sparsity = cfg.decoder_r();
    rc.max_iters = cfg.max_iters;
    rc.tau_sq = default_tau_sq(Y, snr_db, cfg.tau_scale);
    rc.threshold.value = cfg.upsilon;
    rc.threshold.mode = cfg.upsilon_absolute ? ActivityThreshold::Mode::absolute : ActivityThreshold::Mode::relative;
    rc.ridge = cfg.ls_ridge;
    rc.debias = cfg.debias;
    return rc;
}

inline SlotDecode decode_slot(const ScenarioConfig &cfg, const ArrayConfig &arr, const CMat &A, const Dictionary &dict,
                              const CMat &Y, double snr_db)
{
    const RecoveryConfig rc = recovery_config(cfg, Y, snr_db);
    SlotDecode out;
    switch (cfg.decoder)
    {
    case DecoderKind::turbo: {
        const RecoveryResult r = turbo_cosamp(Y, A, dict.atoms, rc);
        out.active = r.active;
        out.rows = spatial_rows(r.state.signal_support, dict.atoms);
        out.iterations = r.iterations;
        out.converged = r.converged();
        break;
    }
    case DecoderKind::nturbo: {
        RefineConfig ref;
        ref.t_local = cfg.t_local;
        ref.t_cyclic = cfg.t_cyclic;
        const NTurboResult r = n_turbo_cosamp(Y, A, dict, arr, rc, ref);
        out.active = r.active;
        out.rows = r.rows;
        out.iterations = r.iterations;
        out.converged = r.converged();
        break;
    }
    case DecoderKind::somp: {
        const SompResult r = s_omp(Y, A, rc.k_a, rc.threshold);
        out.active = r.active;
        for (std::size_t i = 0; i < r.rows.size(); ++i)
            out.rows[r.rows[i]] = r.z.row(Eigen::Index(i)).transpose();
        out.iterations = int(r.rows.size());
        break;
    }
    case DecoderKind::twostage: {
        const TwoStageResult r = two_stage(Y, A, dict.atoms, rc.k_a, cfg.decoder_row_sparsity(), rc.threshold);
        out.active = r.spatial.active;
        out.rows = r.rows;
        out.iterations = int(r.spatial.rows.size());
        break;
    }
    }
    return out;
}

/// Users' channels for one frame (rows of H), drawn continuously or on dictionary atoms.
inline CMat draw_user_channels(const ScenarioConfig &cfg, const ArrayConfig &arr, const Dictionary &dict, Rng &rng)
{
    CMat H(cfg.k_a, arr.m_antennas);
    const double scale = std::sqrt(double(arr.m_antennas) / double(cfg.l_paths));
    // on-grid plants stay inside the refinement domain d >= fresnel
    std::vector<int> plantable;
    if (cfg.on_grid)
        for (int p = 0; p < int(dict.size()); ++p)
            if (dict.locations[std::size_t(p)].distance >= arr.fresnel_distance())
                plantable.push_back(p);
    for (int k = 0; k < cfg.k_a; ++k)
    {
        if (cfg.on_grid)
        {
            CVec h = CVec::Zero(arr.m_antennas);
            for (int l = 0; l < cfg.l_paths; ++l)
            {
                const int p = plantable[std::size_t(rng.uniform_int(0, int(plantable.size()) - 1))];
                h += rng.complex_normal(1.0) * dict.atoms.col(p);
            }
            H.row(k) = scale * h.transpose();
        }
        else
        {
            const PathSet ps = draw_paths(cfg.l_paths, cfg.d_min, cfg.d_max, rng);
            H.row(k) = synth_channel(arr, ps, cfg.field).transpose();
        }
    }
    return H;
}

/// Detection error over codeword sets: missed fraction of the true set plus bogus fraction of the detected set.
inline double set_error(const std::vector<int> &detected, const std::vector<int> &truth)
{
    if (truth.empty())
        return detected.empty() ? 0.0 : 1.0;
    int missed = 0, bogus = 0;
    for (int j : truth)
        missed += std::binary_search(detected.begin(), detected.end(), j) ? 0 : 1;
    for (int j : detected)
        bogus += std::binary_search(truth.begin(), truth.end(), j) ? 0 : 1;
    return double(missed) / double(truth.size()) + (detected.empty() ? 0.0 : double(bogus) / double(detected.size()));
}

/// One URA frame at a single SNR. The dictionary is passed in so sweeps build it once per point.
inline TrialScore run_trial(const ScenarioConfig &cfg, const Dictionary &dict, double snr_db, std::uint64_t seed)
{
    const ArrayConfig arr = cfg.array();
    Rng rng(seed);
    const Codebook cb = make_codebook(cfg.n_block, cfg.j_bits, rng);
    const MessageSet msgs = split_and_encode(random_messages(cfg.k_a, cfg.b_bits(), rng), cfg.s_slots, cfg.j_bits);
    const CMat H = draw_user_channels(cfg, arr, dict, rng);

    const int slots = cfg.stage == Stage::ura ? cfg.s_slots : 1;
    TrialScore score;
    std::vector<SlotChannels> recovered;
    double num = 0.0, den = 0.0, noise = 0.0;
    for (int s = 0; s < slots; ++s)
    {
        const SlotObservation obs = transmit_slot(cb, msgs, s, H, snr_db, rng);
        noise += obs.noise_var;
        const SlotDecode dec = decode_slot(cfg, arr, cb.matrix, dict, obs.y, snr_db);
        score.iterations += dec.iterations;
        score.non_converged += dec.converged ? 0 : 1;

        std::map<int, CVec> truth;
        for (int k = 0; k < cfg.k_a; ++k)
        {
            auto [it, inserted] = truth.try_emplace(obs.user_column[std::size_t(k)], CVec::Zero(arr.m_antennas));
            it->second += H.row(k).transpose();
        }
        for (int j : obs.true_active)
        {
            auto e = dec.rows.find(j);
            num += e == dec.rows.end() ? truth[j].squaredNorm() : (e->second - truth[j]).squaredNorm();
            den += truth[j].squaredNorm();
        }
        score.slot_nmse.push_back(nmse(dec.rows, truth, obs.true_active).value_or(std::nan("")));

        if (cfg.stage == Stage::jadce)
            score.p_e = set_error(dec.active, obs.true_active);
        else
        {
            SlotChannels sc;
            sc.slot = s;
            for (int j : dec.active)
            {
                auto e = dec.rows.find(j);
                sc.channels.push_back(e == dec.rows.end() ? CVec::Zero(arr.m_antennas) : e->second);
                sc.codewords.push_back(j);
            }
            recovered.push_back(std::move(sc));
        }
    }
    score.iterations /= double(slots);
    score.nmse = den > 0.0 ? num / den : std::nan("");
    if (cfg.stage == Stage::ura)
    {
        ClusterConfig cc;
        cc.max_sweeps = cfg.max_sweeps;
        cc.collision_handling = cfg.collision_handling;
        const ClusterResult cr = cluster_decode(recovered, cfg.j_bits, cc);
        score.p_e = per_user_error(cr.messages, msgs.bits);
    }
    score.eb_n0_db = eb_n0_db(cfg.s_slots, double(cfg.n_block), cfg.b_bits(), noise / double(slots));
    score.spectral_eff = spectral_efficiency(cfg.b_bits(), cfg.k_a, cfg.s_slots, cfg.n_block);
    return score;
}

inline Dictionary scenario_dictionary(const ScenarioConfig &cfg)
{
    return build_dictionary(cfg.array(), cfg.dictionary, cfg.gamma, cfg.beta);
}

struct TrialRecord
{
    TrialScore score;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

/// All trials of one scenario point. Trial i uses seed mix_seed(base_seed, i); results are indexed by trial,
/// so the thread count never changes the output.
inline std::vector<TrialRecord> run_point(const ScenarioConfig &cfg, double snr_db, int threads = 1)
{
    cfg.validate();
    const Dictionary dict = scenario_dictionary(cfg);
    std::vector<TrialRecord> out(std::size_t(cfg.seeds));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < cfg.seeds; i = next++)
        {
            TrialRecord &rec = out[std::size_t(i)];
            const auto t0 = std::chrono::steady_clock::now();
            try
            {
                rec.score = run_trial(cfg, dict, snr_db, mix_seed(cfg.base_seed, std::uint64_t(i)));
            }
            catch (const std::exception &e)
            {
                rec.failed = true;
                rec.error = e.what();
            }
            if (cfg.timing)
                rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::max(1, std::min(threads, cfg.seeds));
    if (n == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    return out;
}

struct ResultRow
{
    std::string axis_value;
    double p_e_mean = 0.0;
    double p_e_std = 0.0;
    double nmse_mean_db = 0.0;
    double iters_mean = 0.0;
    double seconds_mean = 0.0;
    int seeds = 0;
    int non_converged = 0;
    int failed = 0;
};

inline ResultRow summarize(const std::string &axis_value, const std::vector<TrialRecord> &trials)
{
    ResultRow row;
    row.axis_value = axis_value;
    double pe = 0.0, pe2 = 0.0, nm = 0.0, it = 0.0, sec = 0.0;
    int nm_count = 0;
    for (const auto &t : trials)
    {
        if (t.failed)
        {
            ++row.failed;
            continue;
        }
        ++row.seeds;
        pe += t.score.p_e;
        pe2 += t.score.p_e * t.score.p_e;
        if (std::isfinite(t.score.nmse))
        {
            nm += t.score.nmse;
            ++nm_count;
        }
        it += t.score.iterations;
        sec += t.seconds;
        row.non_converged += t.score.non_converged;
    }
    const double nan = std::nan("");
    if (row.seeds == 0)
    {
        row.p_e_mean = row.p_e_std = row.nmse_mean_db = row.iters_mean = row.seconds_mean = nan;
        return row;
    }
    const double n = row.seeds;
    row.p_e_mean = pe / n;
    row.p_e_std = row.seeds > 1 ? std::sqrt(std::max(0.0, (pe2 - n * row.p_e_mean * row.p_e_mean) / (n - 1.0))) : 0.0;
    row.nmse_mean_db = nm_count ? linear_to_db(nm / nm_count) : nan;
    row.iters_mean = it / n;
    row.seconds_mean = sec / n;
    return row;
}

inline const char *kCsvHeader = "axis_value,p_e_mean,p_e_std,nmse_mean_db,iters_mean,seconds_mean,seeds";

inline void write_row(std::ostream &os, const ResultRow &r)
{
    std::ostringstream ss;
    ss << std::setprecision(6);
    ss << r.axis_value << ',' << r.p_e_mean << ',' << r.p_e_std << ',' << r.nmse_mean_db << ',' << r.iters_mean << ','
       << r.seconds_mean << ',' << r.seeds << '\n';
    os << ss.str();
}

inline void write_csv(std::ostream &os, const std::vector<ResultRow> &rows)
{
    os << kCsvHeader << '\n';
    for (const auto &r : rows)
        write_row(os, r);
}

enum class SweepAxis
{
    snr,
    n_block,
    j_bits,
    dict,
    decoder
};

inline SweepAxis sweep_axis_from_string(std::string_view s)
{
    if (s == "snr")
        return SweepAxis::snr;
    if (s == "n_block")
        return SweepAxis::n_block;
    if (s == "j_bits")
        return SweepAxis::j_bits;
    if (s == "dict")
        return SweepAxis::dict;
    if (s == "decoder")
        return SweepAxis::decoder;
    throw ConfigError("unknown sweep axis: " + std::string(s));
}

/// Scenario for one sweep point: `value` replaces the swept field. SNR points keep the scenario's other fields.
inline ScenarioConfig apply_axis(ScenarioConfig cfg, SweepAxis axis, const std::string &value)
{
    switch (axis)
    {
    case SweepAxis::snr:
        cfg.set("snr_db", value);
        break;
    case SweepAxis::n_block:
        cfg.set("n_block", value);
        break;
    case SweepAxis::j_bits:
        cfg.set("j_bits", value);
        break;
    case SweepAxis::dict:
        cfg.set("dictionary", value);
        break;
    case SweepAxis::decoder:
        cfg.set("decoder", value);
        break;
    }
    cfg.validate();
    return cfg;
}

struct SweepOutput
{
    std::vector<ResultRow> rows;
    std::vector<std::vector<TrialRecord>> trials; // per point, for trend checks on per-seed values
};

/// One row per value. For non-SNR axes the first configured SNR is used.
inline SweepOutput sweep(const ScenarioConfig &base, SweepAxis axis, const std::vector<std::string> &values, int threads = 1)
{
    if (values.empty())
        throw ConfigError("sweep needs at least one value");
    SweepOutput out;
    for (const auto &v : values)
    {
        const ScenarioConfig cfg = apply_axis(base, axis, v);
        auto trials = run_point(cfg, cfg.snr_db.front(), threads);
        out.rows.push_back(summarize(v, trials));
        out.trials.push_back(std::move(trials));
    }
    return out;
}

/// All configured SNR points of one scenario.
inline SweepOutput simulate(const ScenarioConfig &cfg, int threads = 1)
{
    std::vector<std::string> values;
    for (double s : cfg.snr_db)
    {
        std::ostringstream ss;
        ss << std::setprecision(6) << s;
        values.push_back(ss.str());
    }
    return sweep(cfg, SweepAxis::snr, values, threads);
}

} // namespace nfura

#endif
