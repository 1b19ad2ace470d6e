#include "hhinvex/hhinvex.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "expr.hpp"
#include "harness.hpp"
#include "invex.hpp"
#include "multivar.hpp"
#include "report.hpp"

using namespace hhinvex;

namespace {

thread_local std::string g_last_error;
thread_local long long g_last_offset = -1;

void clear_error() {
    g_last_error.clear();
    g_last_offset = -1;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
hhx_status guarded(Fn&& fn) {
    clear_error();
    try {
        fn();
        return HHX_OK;
    } catch (const ParseError& e) {
        g_last_error = e.what();
        g_last_offset = static_cast<long long>(e.offset);
        return HHX_ERR_PARSE;
    } catch (const NonDifferentiableError& e) {
        g_last_error = e.what();
        return HHX_ERR_NON_DIFFERENTIABLE;
    } catch (const ParameterError& e) {
        g_last_error = e.what();
        return HHX_ERR_PARAMETER;
    } catch (const PreconditionError& e) {
        g_last_error = e.what();
        return HHX_ERR_PRECONDITION;
    } catch (const ConfigError& e) {
        g_last_error = e.what();
        return HHX_ERR_CONFIG;
    } catch (const DomainError& e) {
        g_last_error = e.what();
        return HHX_ERR_DOMAIN;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HHX_ERR_INTERNAL;
    }
}

hhx_status invalid_argument(const char* msg) {
    clear_error();
    g_last_error = msg;
    return HHX_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

struct hhx_expr {
    Expression expr;
};

const char* hhx_version(void) { return kToolVersion; }

const char* hhx_last_error(void) { return g_last_error.c_str(); }

long long hhx_last_error_offset(void) { return g_last_offset; }

void hhx_string_free(char* s) { std::free(s); }

hhx_status hhx_expr_parse(const char* source, const char* const* variables, size_t n_variables,
                          hhx_expr** out) {
    if (!source || !variables || n_variables == 0 || !out)
        return invalid_argument("hhx_expr_parse: null argument");
    return guarded([&] {
        std::vector<std::string> vars;
        for (size_t i = 0; i < n_variables; ++i) {
            if (!variables[i]) throw Error("null variable name");
            vars.emplace_back(variables[i]);
        }
        *out = new hhx_expr{Expression::parse(source, std::move(vars))};
    });
}

void hhx_expr_free(hhx_expr* expr) { delete expr; }

hhx_status hhx_expr_evaluate(const hhx_expr* expr, const double* values, size_t n_values,
                             double* out) {
    if (!expr || !out || (!values && n_values > 0))
        return invalid_argument("hhx_expr_evaluate: null argument");
    return guarded([&] {
        *out = expr->expr.evaluate(std::span<const double>(values, n_values));
    });
}

hhx_status hhx_expr_differentiate(const hhx_expr* expr, const char* variable, hhx_expr** out) {
    if (!expr || !variable || !out)
        return invalid_argument("hhx_expr_differentiate: null argument");
    return guarded([&] { *out = new hhx_expr{expr->expr.differentiate(variable)}; });
}

hhx_status hhx_expr_render(const hhx_expr* expr, char** out) {
    if (!expr || !out) return invalid_argument("hhx_expr_render: null argument");
    return guarded([&] { *out = dup_string(expr->expr.render()); });
}

hhx_status hhx_expr_sexpr(const hhx_expr* expr, char** out) {
    if (!expr || !out) return invalid_argument("hhx_expr_sexpr: null argument");
    return guarded([&] { *out = dup_string(expr->expr.sexpr()); });
}

hhx_status hhx_classify(const char* f_src, const char* eta_src, double lo, double hi,
                        const char* target_class, int grid, double tolerance, char** report_json,
                        int* certified) {
    if (!f_src || !eta_src || !target_class || !report_json || !certified)
        return invalid_argument("hhx_classify: null argument");
    return guarded([&] {
        const int n = grid > 0 ? grid : 64;
        const double tol = tolerance > 0.0 ? tolerance : kDefaultClassTol;
        ScalarFunction f = ScalarFunction::from_expression(f_src);
        EtaMap eta = EtaMap::scalar(eta_src);
        ConvexClass target = class_from_name(target_class);
        Grid3 g{n, n, n / 2 + 1};
        ClassCertificate cert = classify(f.value, eta, lo, hi, target, g, tol);
        *report_json = dup_string(build_classify_report(f_src, eta_src, lo, hi, cert).dump(2));
        *certified = cert.certified ? 1 : 0;
    });
}

hhx_status hhx_check_condition_c(const char* eta_src, double lo, double hi, int grid,
                                 char** report_json, int* pass) {
    if (!eta_src || !report_json || !pass)
        return invalid_argument("hhx_check_condition_c: null argument");
    return guarded([&] {
        const int n = grid > 0 ? grid : 9;
        EtaMap eta = EtaMap::scalar(eta_src);
        ConditionCReport cc = check_condition_c(eta, Box::interval(lo, hi), n);
        *report_json = dup_string(build_condition_c_report(eta_src, cc).dump(2));
        *pass = cc.pass ? 1 : 0;
    });
}

hhx_status hhx_verify(const char* f_src, const char* fprime_src, const char* eta_src, double a,
                      double b, const char* const* theorems, size_t n_theorems, double p, double q,
                      double quad_tol, const char* format, char** report_out, int* n_holds,
                      int* n_violated, int* n_inconclusive) {
    if (!f_src || !eta_src || !theorems || n_theorems == 0 || !format || !report_out || !n_holds ||
        !n_violated || !n_inconclusive)
        return invalid_argument("hhx_verify: null argument");
    const std::string fmt = format;
    if (fmt != "json" && fmt != "csv")
        return invalid_argument("hhx_verify: format must be \"json\" or \"csv\"");
    return guarded([&] {
        const double tol = quad_tol > 0.0 ? quad_tol : kDefaultQuadTol;
        ScalarFunction f =
            fprime_src ? ScalarFunction::from_expression_with_deriv(f_src, fprime_src)
                       : ScalarFunction::from_expression(f_src);
        EtaMap eta = EtaMap::scalar(eta_src);

        BoundParams params;
        if (!std::isnan(p)) params.p = p;
        if (!std::isnan(q)) params.q = q;

        std::vector<BoundEvaluation> evals;
        for (size_t i = 0; i < n_theorems; ++i) {
            if (!theorems[i]) throw ParameterError("null theorem name");
            TheoremId id = theorem_from_name(theorems[i]);
            if (id == TheoremId::Eq1 || id == TheoremId::Eq2)
                throw ParameterError("Eq1/Eq2 take an eta-path; use hhx_multivar_verify");
            evals.push_back(verify(id, f, eta, a, b, params, tol));
        }

        int holds = 0, violated = 0, inconclusive = 0;
        for (const auto& ev : evals) {
            if (ev.verdict == Verdict::Holds) ++holds;
            else if (ev.verdict == Verdict::Violated) ++violated;
            else ++inconclusive;
        }
        *n_holds = holds;
        *n_violated = violated;
        *n_inconclusive = inconclusive;

        if (fmt == "csv") {
            *report_out = dup_string(verify_csv(evals));
        } else {
            VerifyEcho echo{f_src, fprime_src ? fprime_src : "", eta_src, a, b,
                            params.p, params.q, tol};
            *report_out = dup_string(build_verify_report(echo, evals).dump(2));
        }
    });
}

hhx_status hhx_multivar_verify(const char* f_src, const char* eta_src, const double* x,
                               const double* y, size_t dim, double a, double b,
                               const char* theorem, double p, double q, double quad_tol,
                               char** report_json, int* verdict) {
    if (!f_src || !eta_src || !x || !y || dim == 0 || !theorem || !report_json || !verdict)
        return invalid_argument("hhx_multivar_verify: null argument");
    return guarded([&] {
        const double tol = quad_tol > 0.0 ? quad_tol : kDefaultQuadTol;
        TheoremId id = theorem_from_name(theorem);
        if (id != TheoremId::Eq1 && id != TheoremId::Eq2)
            throw ParameterError("hhx_multivar_verify handles Eq1 and Eq2 only");
        const int n = static_cast<int>(dim);
        VectorFunction f = VectorFunction::from_expression(f_src, n);
        EtaMap eta = EtaMap::vector(eta_src, n);
        std::span<const double> xs(x, dim), ys(y, dim);

        BoundParams params;
        if (!std::isnan(p)) params.p = p;
        if (!std::isnan(q)) params.q = q;

        ClassCertificate cert = check_path_logpreinvex(f, xs, ys, eta);
        BoundEvaluation ev = verify_multivar(id, f, xs, ys, eta, a, b, params, tol);

        MultivarEcho echo{f_src,
                          eta_src,
                          std::vector<double>(x, x + dim),
                          std::vector<double>(y, y + dim),
                          a,
                          b,
                          ev.params.p,
                          ev.params.q,
                          tol};
        *report_json = dup_string(build_multivar_report(echo, id, cert, ev).dump(2));
        *verdict = ev.verdict == Verdict::Holds ? 0 : ev.verdict == Verdict::Violated ? 1 : 2;
    });
}

hhx_status hhx_campaign_run(const char* config_json, char** summary_json_out,
                            char** trials_csv_out, long long* n_violations) {
    if (!config_json || !summary_json_out || !trials_csv_out || !n_violations)
        return invalid_argument("hhx_campaign_run: null argument");
    return guarded([&] {
        CampaignConfig config = CampaignConfig::from_json_text(config_json);
        CampaignResult result = run_campaign(config);
        *summary_json_out = dup_string(summary_json(result));
        *trials_csv_out = dup_string(trials_csv(result));
        *n_violations = result.violations;
    });
}

}  // extern "C"
