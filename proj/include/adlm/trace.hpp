#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "adlm/fon.hpp"
#include "adlm/subsolve.hpp"

namespace adlm {

enum class Verdict { Converged, Diverged, MaxIters };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "converged";
        case Verdict::Diverged: return "diverged";
        case Verdict::MaxIters: return "max-iters";
    }
    return "?";
}

/// Stopping rule shared by the outer loops. `primal_tol` bounds the coupling
/// residual, `step_tol` bounds the iterate step (ADPM) or the dual step
/// (ADMM / method of multipliers).
struct StopRule {
    int max_iters = 1000;
    double primal_tol = 1e-8;
    double step_tol = 1e-8;
    double divergence_bound = 1e6;

    void validate() const {
        if (max_iters <= 0 || primal_tol <= 0.0 || step_tol <= 0.0 || divergence_bound <= 0.0)
            throw std::invalid_argument("stop rule: all fields must be positive");
    }
};

/// State at iteration t. `rho` is the penalty used by the update t -> t+1.
struct TraceRecord {
    int t = 0;
    double rho = 0.0;
    Vector x, z, y;
    double primal_residual = 0.0;
    double stationarity = 0.0;
    double objective = 0.0;
    double dual_step = 0.0;  // ||y(t) - y(t-1)||, 0 at t = 0
    SolveStatus x_status = SolveStatus::Global;
    SolveStatus z_status = SolveStatus::Global;
    bool x_grid = false, z_grid = false;
};

namespace detail {

inline void csv_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

inline int status_code(SolveStatus s, bool grid) {
    int base = s == SolveStatus::Global ? 0 : (s == SolveStatus::Local ? 1 : 2);
    return base + (grid ? 10 : 0);  // grid annotation in the tens digit
}

}  // namespace detail

/// Raw material for the convergence diagnostics: the full per-iteration
/// history plus the final verdict. Immutable once returned by a run.
struct IterationTrace {
    std::vector<TraceRecord> records;
    Verdict verdict = Verdict::MaxIters;
    std::optional<FonCertificate> fon;  // attached by ADMM-style runs on convergence

    std::string algorithm;  // "adpm", "admm", "qpm", "mm", "dadlm", "dgd"
    std::string penalty_description;
    std::string dual_policy_description;
    std::string notes;  // e.g. which guarantee regime a schedule falls under

    // module-specific per-iteration columns, appended after the core schema
    std::vector<std::pair<std::string, std::vector<double>>> extra_columns;

    int iterations() const { return static_cast<int>(records.size()) - 1; }
    const TraceRecord& final_record() const { return records.back(); }

    double final_primal_residual() const { return records.back().primal_residual; }
    double final_objective() const { return records.back().objective; }

    /// Columns: t, rho, r, stationarity, objective, dual_step, the flattened
    /// iterates (x0.., z0.., y0..), subproblem status codes, then any module
    /// extras. The schema is append-only.
    std::string csv() const {
        std::string out;
        out += "t,rho,r,stationarity,objective,dual_step";
        if (!records.empty()) {
            const auto& r0 = records.front();
            for (Index i = 0; i < r0.x.size(); ++i) out += ",x" + std::to_string(i);
            for (Index i = 0; i < r0.z.size(); ++i) out += ",z" + std::to_string(i);
            for (Index i = 0; i < r0.y.size(); ++i) out += ",y" + std::to_string(i);
        }
        out += ",x_status,z_status";
        for (const auto& col : extra_columns) out += "," + col.first;
        out += "\n";

        for (std::size_t k = 0; k < records.size(); ++k) {
            const auto& r = records[k];
            out += std::to_string(r.t);
            out += ',';
            detail::csv_double(out, r.rho);
            out += ',';
            detail::csv_double(out, r.primal_residual);
            out += ',';
            detail::csv_double(out, r.stationarity);
            out += ',';
            detail::csv_double(out, r.objective);
            out += ',';
            detail::csv_double(out, r.dual_step);
            for (Index i = 0; i < r.x.size(); ++i) {
                out += ',';
                detail::csv_double(out, r.x[i]);
            }
            for (Index i = 0; i < r.z.size(); ++i) {
                out += ',';
                detail::csv_double(out, r.z[i]);
            }
            for (Index i = 0; i < r.y.size(); ++i) {
                out += ',';
                detail::csv_double(out, r.y[i]);
            }
            out += ',' + std::to_string(detail::status_code(r.x_status, r.x_grid));
            out += ',' + std::to_string(detail::status_code(r.z_status, r.z_grid));
            for (const auto& col : extra_columns) {
                out += ',';
                detail::csv_double(out, col.second[k]);
            }
            out += '\n';
        }
        return out;
    }

    void write_csv(std::ostream& os) const { os << csv(); }

    nlohmann::ordered_json summary() const {
        nlohmann::ordered_json j;
        j["verdict"] = to_string(verdict);
        j["iterations"] = iterations();
        j["final_r"] = final_primal_residual();
        j["final_objective"] = final_objective();
        j["algorithm"] = algorithm;
        j["penalty"] = penalty_description;
        j["dual_policy"] = dual_policy_description;
        if (!notes.empty()) j["notes"] = notes;
        if (fon) {
            nlohmann::ordered_json fj;
            fj["passed"] = fon->passed;
            fj["tolerance"] = fon->tolerance;
            fj["primal_residual"] = fon->primal_residual;
            fj["set_violation"] = fon->set_violation;
            fj["dual_feasibility_violation"] = fon->dual_feasibility_violation;
            fj["complementary_slackness_violation"] = fon->complementary_slackness_violation;
            fj["stationarity_residual_x"] = fon->stationarity_residual_x;
            fj["stationarity_residual_z"] = fon->stationarity_residual_z;
            fj["regularity_ok"] = fon->regularity_ok;
            j["fon"] = fj;
        }
        return j;
    }
};

}  // namespace adlm
