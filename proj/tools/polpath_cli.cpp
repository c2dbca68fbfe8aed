// Copyright 2026 The polpath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polpath/polpath.h"

namespace fs = std::filesystem;

namespace {

/// Carries a C API status out of nested helpers.
struct Failure {
    int code;
};

void check(polpath_status s) {
    if (s != POLPATH_OK) {
        std::fprintf(stderr, "error: %s\n", polpath_last_error());
        throw Failure{static_cast<int>(s)};
    }
}

std::string take(char *s) {
    std::string out(s);
    polpath_string_free(s);
    return out;
}

template <typename Fn, typename... Args>
std::string get_string(Fn fn, Args... args) {
    char *s = nullptr;
    check(fn(args..., &s));
    return take(s);
}

struct ConfigDeleter {
    void operator()(polpath_config *c) const { polpath_config_free(c); }
};
struct PipelineDeleter {
    void operator()(polpath_pipeline *p) const { polpath_pipeline_free(p); }
};
struct SweepDeleter {
    void operator()(polpath_sweep *p) const { polpath_sweep_free(p); }
};
struct TomographyDeleter {
    void operator()(polpath_tomography *p) const { polpath_tomography_free(p); }
};
struct MbqcDeleter {
    void operator()(polpath_mbqc *p) const { polpath_mbqc_free(p); }
};

struct Common {
    std::string config_path;
    std::string out_dir = "polpath_out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    bool infinite = false;
};

std::unique_ptr<polpath_config, ConfigDeleter> load_config(const Common &opts) {
    polpath_config *raw = nullptr;
    if (opts.config_path.empty()) {
        check(polpath_config_default(&raw));
    } else {
        check(polpath_config_from_file(opts.config_path.c_str(), &raw));
    }
    std::unique_ptr<polpath_config, ConfigDeleter> cfg(raw);
    for (const auto &kv : opts.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "error: --set expects KEY=VALUE, got \"%s\"\n", kv.c_str());
            throw Failure{POLPATH_ERR_CONFIG};
        }
        check(polpath_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    if (opts.seed) check(polpath_config_set(cfg.get(), "seed", std::to_string(*opts.seed).c_str()));
    if (opts.infinite) check(polpath_config_set(cfg.get(), "infinite_statistics", "true"));
    return cfg;
}

/// Files are collected first and written only once every computation has
/// succeeded, so a failed run leaves no partial output.
class Output {
   public:
    void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

    void write(const std::string &dir) const {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            std::fprintf(stderr, "error: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
            throw Failure{POLPATH_ERR_INTERNAL};
        }
        for (const auto &[name, content] : files_) {
            std::ofstream f(fs::path(dir) / name, std::ios::binary);
            f << content;
            if (!f) {
                std::fprintf(stderr, "error: cannot write %s\n", name.c_str());
                throw Failure{POLPATH_ERR_INTERNAL};
            }
        }
    }

   private:
    std::vector<std::pair<std::string, std::string>> files_;
};

void cmd_pipeline(const Common &opts) {
    auto cfg = load_config(opts);
    polpath_pipeline *raw = nullptr;
    check(polpath_run_pipeline(cfg.get(), &raw));
    std::unique_ptr<polpath_pipeline, PipelineDeleter> result(raw);

    Output out;
    out.add("config.json", get_string(polpath_config_to_json, static_cast<const polpath_config *>(cfg.get())));
    out.add("summary.json", get_string(polpath_pipeline_summary_json, static_cast<const polpath_pipeline *>(raw)));
    for (size_t k = 0; k < polpath_pipeline_checkpoint_count(raw); k++) {
        std::string name = get_string(polpath_pipeline_checkpoint_name, static_cast<const polpath_pipeline *>(raw), k);
        out.add("checkpoint_" + name + ".json",
                get_string(polpath_pipeline_checkpoint_json, static_cast<const polpath_pipeline *>(raw), k));
    }

    double p = 0;
    check(polpath_pipeline_post_selection_probability(raw, &p));
    std::printf("post_selection_probability %.4f\n", p);
    double c = 0;
    if (polpath_pipeline_coincidence_probability(raw, &c) == POLPATH_OK) std::printf("coincidence_probability %.6f\n", c);
    for (const char *name : {"psi_prime", "singlet", "cluster2", "loop_state", "cluster3"}) {
        double f = 0;
        if (polpath_pipeline_fidelity(raw, name, &f) == POLPATH_OK) std::printf("fidelity %-10s %.6f\n", name, f);
    }
    out.write(opts.out_dir);
}

void cmd_sweep(const Common &opts) {
    auto cfg = load_config(opts);
    polpath_sweep *raw = nullptr;
    check(polpath_run_sweep(cfg.get(), &raw));
    std::unique_ptr<polpath_sweep, SweepDeleter> result(raw);

    Output out;
    std::string fits = "[\n";
    const size_t n = polpath_sweep_count(raw);
    for (size_t k = 0; k < n; k++) {
        const polpath_sweep *r = raw;
        std::string file = get_string(polpath_sweep_file_name, r, k);
        out.add(file, get_string(polpath_sweep_csv, r, k));
        std::string fit = get_string(polpath_sweep_fit_json, r, k);
        while (!fit.empty() && fit.back() == '\n') fit.pop_back();
        fits += fit + (k + 1 < n ? ",\n" : "\n");
        double dev = 0;
        check(polpath_sweep_max_deviation(r, k, &dev));
        std::fprintf(stderr, "%s max |sim - oracle| = %.3e\n", file.c_str(), dev);
    }
    fits += "]\n";
    out.add("fits.json", fits);
    std::printf("wrote %zu fringe file(s)\n", n);
    out.write(opts.out_dir);
}

void cmd_tomography(const Common &opts, const std::string &counts_path) {
    auto cfg = load_config(opts);
    polpath_tomography *raw = nullptr;
    if (counts_path.empty()) {
        check(polpath_run_tomography(cfg.get(), &raw));
    } else {
        std::ifstream in(counts_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot read %s\n", counts_path.c_str());
            throw Failure{POLPATH_ERR_CONFIG};
        }
        std::stringstream buf;
        buf << in.rdbuf();
        check(polpath_tomography_from_csv(cfg.get(), buf.str().c_str(), &raw));
    }
    std::unique_ptr<polpath_tomography, TomographyDeleter> result(raw);
    const polpath_tomography *r = raw;

    Output out;
    out.add("counts.csv", get_string(polpath_tomography_counts_csv, r));
    out.add("rho_linear.json", get_string(polpath_tomography_rho_json, r, POLPATH_LINEAR));
    out.add("rho_mle.json", get_string(polpath_tomography_rho_json, r, POLPATH_MLE));
    out.add("summary.json", get_string(polpath_tomography_summary_json, r));

    for (auto [est, label] : {std::pair{POLPATH_LINEAR, "linear"}, std::pair{POLPATH_MLE, "mle"}}) {
        double fs = 0, fp = 0;
        check(polpath_tomography_fidelity(r, est, POLPATH_SINGLET, &fs));
        check(polpath_tomography_fidelity(r, est, POLPATH_PSI_PRIME, &fp));
        std::printf("%-6s F(singlet) %.3f  F(psi_prime) %.3f\n", label, fs, fp);
    }
    out.write(opts.out_dir);
}

void cmd_mbqc(const Common &opts, const std::string &branch, bool sample) {
    auto cfg = load_config(opts);
    int m1 = -1, m2 = -1;
    if (!branch.empty()) {
        if (std::sscanf(branch.c_str(), "%d,%d", &m1, &m2) != 2) {
            std::fprintf(stderr, "error: --branch expects M1,M2\n");
            throw Failure{POLPATH_ERR_CONFIG};
        }
    }
    polpath_mbqc *raw = nullptr;
    check(polpath_run_mbqc(cfg.get(), m1, m2, sample ? 1 : 0, &raw));
    std::unique_ptr<polpath_mbqc, MbqcDeleter> result(raw);
    const polpath_mbqc *r = raw;
    std::string report = get_string(polpath_mbqc_report_json, r);

    Output out;
    out.add("mbqc.json", report);
    double worst = 0;
    check(polpath_mbqc_min_overlap(r, &worst));
    std::printf("min overlap %.10f\n", worst);
    std::fputs(report.c_str(), stdout);
    out.write(opts.out_dir);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"polpath: linear-optical simulator of polarization+path cluster-state expansion"};
    app.require_subcommand(1);
    Common opts;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", opts.config_path, "experiment config (JSON, spec_version 1)");
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", opts.seed, "random seed");
        sub->add_option("--set", opts.overrides, "override a config key (KEY=VALUE, repeatable)");
        sub->add_flag("--infinite-statistics", opts.infinite, "use expected counts instead of Poisson samples");
    };
    auto *pipeline = app.add_subcommand("pipeline", "run the optical chain and report checkpoint fidelities");
    auto *sweep = app.add_subcommand("sweep", "scan alpha and fit the fringes");
    auto *tomography = app.add_subcommand("tomography", "simulate and reconstruct the polarization state");
    auto *mbqc = app.add_subcommand("mbqc", "two-step measurement demo on the three-qubit cluster");
    for (auto *s : {pipeline, sweep, tomography, mbqc}) add_common(s);
    std::string counts_path;
    tomography->add_option("--counts", counts_path, "reconstruct from this counts CSV instead of simulating");
    std::string branch;
    bool sample = false;
    auto *branch_opt = mbqc->add_option("--branch", branch, "force outcomes M1,M2");
    mbqc->add_flag("--sample", sample, "draw outcomes (mbqc_samples runs)")->excludes(branch_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : POLPATH_ERR_CONFIG;
    }

    try {
        if (*pipeline) cmd_pipeline(opts);
        if (*sweep) cmd_sweep(opts);
        if (*tomography) cmd_tomography(opts, counts_path);
        if (*mbqc) cmd_mbqc(opts, branch, sample);
    } catch (const Failure &f) {
        return f.code;
    }
    return 0;
}
