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


// nfura command-line driver: simulate, sweep, dict-info, selftest.

#include "nfura/nfura.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConverged = 3;

struct Options
{
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    std::string out_path;
    bool strict = false;
    bool timing = false;
    std::vector<std::string> overrides;
};

nfura::ScenarioConfig load(const Options &opt)
{
    nfura::ScenarioConfig cfg;
    if (!opt.config_path.empty())
        cfg = nfura::load_config(opt.config_path);
    for (const auto &kv : opt.overrides)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw nfura::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed_given)
        cfg.base_seed = opt.seed;
    if (opt.timing)
        cfg.timing = true;
    cfg.validate();
    return cfg;
}

int emit(const Options &opt, const nfura::SweepOutput &res)
{
    if (opt.out_path.empty())
        nfura::write_csv(std::cout, res.rows);
    else
    {
        std::ofstream os(opt.out_path);
        if (!os)
            throw nfura::ConfigError("cannot open output file: " + opt.out_path);
        nfura::write_csv(os, res.rows);
    }
    int non_converged = 0, failed = 0;
    for (const auto &r : res.rows)
    {
        non_converged += r.non_converged;
        failed += r.failed;
    }
    if (failed > 0)
        std::cerr << "warning: " << failed << " trial(s) failed; their points report NaN fields\n";
    if (non_converged > 0)
    {
        std::cerr << (opt.strict ? "error: " : "warning: ") << non_converged
                  << " slot decode(s) reached the iteration cap\n";
        if (opt.strict)
            return kExitNonConverged;
    }
    return kExitOk;
}

int dict_info(const nfura::ScenarioConfig &cfg)
{
    const nfura::ArrayConfig arr = cfg.array();
    const nfura::Dictionary dict = nfura::scenario_dictionary(cfg);
    std::cout << "kind=" << nfura::to_string(dict.kind) << '\n'
              << "m_antennas=" << arr.m_antennas << '\n'
              << "wavelength=" << arr.wavelength << '\n'
              << "fresnel_distance=" << arr.fresnel_distance() << '\n'
              << "rayleigh_distance=" << arr.rayleigh_distance() << '\n'
              << "rows=" << dict.rows() << '\n'
              << "cols=" << dict.size() << '\n'
              << "n_angles=" << dict.n_angles << '\n'
              << "n_rings=" << dict.n_rings << '\n'
              << "theta_step=" << dict.theta_step << '\n'
              << "ring_step=" << dict.ring_step << '\n';
    if (dict.kind == nfura::DictionaryKind::polar_proposed)
        std::cout << "gamma=" << cfg.gamma << '\n';
    if (dict.kind == nfura::DictionaryKind::polar_beta)
        std::cout << "beta=" << cfg.beta << '\n';
    if (dict.kind != nfura::DictionaryKind::angular_dft)
        std::cout << "max_adjacent_coherence=" << nfura::max_adjacent_coherence(dict) << '\n';
    return kExitOk;
}

int selftest(const Options &opt, bool all, const std::vector<std::string> &only)
{
    namespace st = nfura::selftest;
    st::CheckOptions co;
    co.base = load(opt);
    co.threads = opt.threads;
    bool ok = true;
    for (const auto &check : st::all_checks())
    {
        const bool wanted = only.empty() ? (all || check.fast)
                                         : std::find(only.begin(), only.end(), check.id) != only.end();
        if (!wanted)
            continue;
        const st::CheckResult r = check.run(co);
        std::cout << st::format(r) << std::endl;
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitFailed;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"nfura: near-field unsourced random access simulator"};
    app.require_subcommand(1);

    Options opt;
    const auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", opt.config_path, "key=value scenario file");
        sub->add_option("--set", opt.overrides, "override one config key (key=value), repeatable");
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t s) {
                opt.seed = s;
                opt.seed_given = true;
            },
            "base seed");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    };

    auto *sim = app.add_subcommand("simulate", "run every configured SNR point, CSV to stdout or --out");
    add_common(sim);
    sim->add_option("--out", opt.out_path, "CSV output path");
    sim->add_flag("--strict", opt.strict, "exit 3 if any decode reaches the iteration cap");
    sim->add_flag("--timing", opt.timing, "record wall-clock seconds per trial");

    std::string axis;
    std::vector<std::string> values;
    auto *swp = app.add_subcommand("sweep", "sweep one axis at the first configured SNR (or over SNR)");
    add_common(swp);
    swp->add_option("--axis", axis, "snr | n_block | j_bits | dict | decoder")->required();
    swp->add_option("--values", values, "comma-separated axis values")->required()->delimiter(',');
    swp->add_option("--out", opt.out_path, "CSV output path");
    swp->add_flag("--strict", opt.strict, "exit 3 if any decode reaches the iteration cap");
    swp->add_flag("--timing", opt.timing, "record wall-clock seconds per trial");

    auto *info = app.add_subcommand("dict-info", "print dictionary dimensions and coherence");
    add_common(info);

    bool all = false;
    std::vector<std::string> only;
    auto *self = app.add_subcommand("selftest", "run the numbered oracle and trend checks");
    add_common(self);
    self->add_flag("--all", all, "include the Monte Carlo checks (minutes)");
    self->add_option("--only", only, "check ids to run, e.g. 3,9c")->delimiter(',');

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
        app.exit(e);
        return kExitConfig;
    }

    try
    {
        if (*sim)
            return emit(opt, nfura::simulate(load(opt), opt.threads));
        if (*swp)
            return emit(opt, nfura::sweep(load(opt), nfura::sweep_axis_from_string(axis), values, opt.threads));
        if (*info)
            return dict_info(load(opt));
        if (*self)
            return selftest(opt, all, only);
    }
    catch (const nfura::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
    return kExitOk;
}
