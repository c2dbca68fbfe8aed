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

#include "polpath/polpath.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "polpath/error.hpp"
#include "polpath/pipeline.hpp"

struct polpath_config {
    polpath::ExperimentConfig value;
};
struct polpath_pipeline {
    polpath::PipelineResult value;
};
struct polpath_sweep {
    std::vector<polpath::FringeResult> value;
};
struct polpath_tomography {
    polpath::TomographyRun value;
};
struct polpath_mbqc {
    polpath::MbqcReport value;
};

namespace {

thread_local std::string g_last_error;

polpath_status fail(polpath_status code, const std::string &message) {
    g_last_error = message;
    return code;
}

template <typename F>
polpath_status guarded(F &&body) {
    try {
        g_last_error.clear();
        body();
        return POLPATH_OK;
    } catch (const polpath::ConfigError &e) {
        return fail(POLPATH_ERR_CONFIG, e.what());
    } catch (const polpath::DomainError &e) {
        return fail(POLPATH_ERR_DOMAIN, e.what());
    } catch (const polpath::AnalysisError &e) {
        return fail(POLPATH_ERR_ANALYSIS, e.what());
    } catch (const std::exception &e) {
        return fail(POLPATH_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(POLPATH_ERR_INTERNAL, "unknown error");
    }
}

char *copy_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(const void *p, const char *what) {
    if (p == nullptr) throw polpath::DomainError(std::string("null argument: ") + what);
}

std::string dump(const nlohmann::ordered_json &j) { return j.dump(2) + "\n"; }

template <typename T>
const T &at(const std::vector<T> &v, size_t index) {
    if (index >= v.size()) throw polpath::DomainError("index " + std::to_string(index) + " out of range");
    return v[index];
}

}  // namespace

extern "C" {

const char *polpath_version(void) { return "0.1.0"; }

const char *polpath_last_error(void) { return g_last_error.c_str(); }

void polpath_string_free(char *s) { std::free(s); }

polpath_status polpath_config_default(polpath_config **out) {
    return guarded([&] {
        require(out, "out");
        *out = new polpath_config{};
    });
}

polpath_status polpath_config_from_json(const char *json, polpath_config **out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new polpath_config{polpath::ExperimentConfig::from_json_text(json)};
    });
}

polpath_status polpath_config_from_file(const char *path, polpath_config **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        std::ifstream in(path);
        if (!in) throw polpath::ConfigError(std::string("cannot read config file ") + path);
        std::stringstream buf;
        buf << in.rdbuf();
        *out = new polpath_config{polpath::ExperimentConfig::from_json_text(buf.str())};
    });
}

polpath_status polpath_config_set(polpath_config *cfg, const char *key, const char *value) {
    return guarded([&] {
        require(cfg, "cfg");
        require(key, "key");
        require(value, "value");
        cfg->value.set(key, value);
    });
}

polpath_status polpath_config_to_json(const polpath_config *cfg, char **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = copy_string(dump(cfg->value.to_json()));
    });
}

void polpath_config_free(polpath_config *cfg) { delete cfg; }

polpath_status polpath_run_pipeline(const polpath_config *cfg, polpath_pipeline **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new polpath_pipeline{polpath::run_pipeline(cfg->value)};
    });
}

polpath_status polpath_pipeline_post_selection_probability(const polpath_pipeline *r, double *out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = r->value.post_selection_probability;
    });
}

polpath_status polpath_pipeline_coincidence_probability(const polpath_pipeline *r, double *out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        if (!r->value.coincidence_probability) throw polpath::DomainError("the chain stopped before the analyzers");
        *out = *r->value.coincidence_probability;
    });
}

polpath_status polpath_pipeline_fidelity(const polpath_pipeline *r, const char *name, double *out) {
    return guarded([&] {
        require(r, "result");
        require(name, "name");
        require(out, "out");
        for (const auto &[n, f] : r->value.fidelities) {
            if (n == name) {
                *out = f;
                return;
            }
        }
        throw polpath::DomainError(std::string("no fidelity named ") + name + " at the stages that ran");
    });
}

polpath_status polpath_pipeline_summary_json(const polpath_pipeline *r, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(dump(r->value.summary_json()));
    });
}

size_t polpath_pipeline_checkpoint_count(const polpath_pipeline *r) {
    return r == nullptr ? 0 : r->value.checkpoints.size();
}

polpath_status polpath_pipeline_checkpoint_name(const polpath_pipeline *r, size_t index, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(at(r->value.checkpoints, index).name);
    });
}

polpath_status polpath_pipeline_checkpoint_json(const polpath_pipeline *r, size_t index, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        const auto &cp = at(r->value.checkpoints, index);
        nlohmann::ordered_json j;
        j["name"] = cp.name;
        j["members"] = nlohmann::ordered_json::array();
        for (const auto &m : cp.state) j["members"].push_back({{"weight", m.weight}, {"state", m.state.to_json()}});
        *out = copy_string(dump(j));
    });
}

void polpath_pipeline_free(polpath_pipeline *r) { delete r; }

polpath_status polpath_run_sweep(const polpath_config *cfg, polpath_sweep **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new polpath_sweep{polpath::sweep_alpha(cfg->value)};
    });
}

size_t polpath_sweep_count(const polpath_sweep *r) { return r == nullptr ? 0 : r->value.size(); }

polpath_status polpath_sweep_file_name(const polpath_sweep *r, size_t index, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(at(r->value, index).file_name());
    });
}

polpath_status polpath_sweep_csv(const polpath_sweep *r, size_t index, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(at(r->value, index).to_csv());
    });
}

polpath_status polpath_sweep_fit_json(const polpath_sweep *r, size_t index, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(dump(at(r->value, index).fit_json()));
    });
}

polpath_status polpath_sweep_max_deviation(const polpath_sweep *r, size_t index, double *out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        const auto &f = at(r->value, index);
        double worst = 0;
        for (size_t k = 0; k < f.expected.size(); k++) worst = std::max(worst, 4 * std::abs(f.expected[k] - f.oracle[k]));
        *out = worst;
    });
}

void polpath_sweep_free(polpath_sweep *r) { delete r; }

polpath_status polpath_run_tomography(const polpath_config *cfg, polpath_tomography **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = new polpath_tomography{polpath::run_tomography(cfg->value)};
    });
}

polpath_status polpath_tomography_from_csv(const polpath_config *cfg, const char *csv, polpath_tomography **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(csv, "csv");
        require(out, "out");
        auto data = polpath::TomographyData::from_csv(csv);
        *out = new polpath_tomography{polpath::reconstruct_tomography(data, cfg->value)};
    });
}

polpath_status polpath_tomography_counts_csv(const polpath_tomography *r, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(r->value.data.to_csv());
    });
}

polpath_status polpath_tomography_rho_json(const polpath_tomography *r, polpath_estimator which, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        const Eigen::Matrix4cd &m = which == POLPATH_MLE ? r->value.mle.rho.matrix() : r->value.linear;
        *out = copy_string(dump(polpath::matrix_to_json(m)));
    });
}

polpath_status polpath_tomography_fidelity(const polpath_tomography *r, polpath_estimator which,
                                           polpath_target target, double *out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        const polpath::PolarizationVector v = target == POLPATH_SINGLET ? polpath::fixtures::singlet()
                                                                        : polpath::fixtures::psi_prime(r->value.reflectivity);
        const Eigen::Matrix4cd &m = which == POLPATH_MLE ? r->value.mle.rho.matrix() : r->value.linear;
        *out = (v.adjoint() * m * v)(0, 0).real();
    });
}

polpath_status polpath_tomography_summary_json(const polpath_tomography *r, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(dump(r->value.summary_json()));
    });
}

void polpath_tomography_free(polpath_tomography *r) { delete r; }

polpath_status polpath_run_mbqc(const polpath_config *cfg, int m1, int m2, int sample, polpath_mbqc **out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        std::optional<std::pair<int, int>> branch;
        if (m1 >= 0 || m2 >= 0) branch = std::pair{m1, m2};
        *out = new polpath_mbqc{polpath::run_mbqc_demo(cfg->value, branch, sample != 0)};
    });
}

polpath_status polpath_mbqc_min_overlap(const polpath_mbqc *r, double *out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = r->value.min_overlap();
    });
}

polpath_status polpath_mbqc_report_json(const polpath_mbqc *r, char **out) {
    return guarded([&] {
        require(r, "result");
        require(out, "out");
        *out = copy_string(dump(r->value.to_json()));
    });
}

void polpath_mbqc_free(polpath_mbqc *r) { delete r; }

}  // extern "C"
