/* hhinvex: numerical certification of generalized-convexity classes and
 * Hermite-Hadamard-type midpoint bounds along eta-paths.
 *
 * C API over the C++ core: opaque handles plus status codes. All returned
 * strings are heap-allocated; release them with hhx_string_free. Error
 * details for the calling thread are available via hhx_last_error /
 * hhx_last_error_offset until the next API call on that thread.
 */
#ifndef HHINVEX_H
#define HHINVEX_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HHINVEX_API __declspec(dllexport)
#else
#define HHINVEX_API __attribute__((visibility("default")))
#endif

typedef enum hhx_status {
    HHX_OK = 0,
    HHX_ERR_INVALID_ARGUMENT = 1,
    HHX_ERR_PARSE = 2,              /* syntax/identifier/arity error; see last_error_offset */
    HHX_ERR_DOMAIN = 3,             /* evaluation left the mathematical domain */
    HHX_ERR_NON_DIFFERENTIABLE = 4, /* derivative requested through min/max */
    HHX_ERR_PARAMETER = 5,          /* bad theorem parameter or orientation */
    HHX_ERR_PRECONDITION = 6,       /* certification/positivity/Condition C gate failed */
    HHX_ERR_CONFIG = 7,             /* campaign config rejected */
    HHX_ERR_INTERNAL = 8
} hhx_status;

HHINVEX_API const char* hhx_version(void);

/* Message for the most recent failure on this thread ("" when none). */
HHINVEX_API const char* hhx_last_error(void);
/* Byte offset for parse errors, -1 otherwise. */
HHINVEX_API long long hhx_last_error_offset(void);

HHINVEX_API void hhx_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Expressions                                                         */

typedef struct hhx_expr hhx_expr;

HHINVEX_API hhx_status hhx_expr_parse(const char* source, const char* const* variables,
                                      size_t n_variables, hhx_expr** out);
HHINVEX_API void hhx_expr_free(hhx_expr* expr);
HHINVEX_API hhx_status hhx_expr_evaluate(const hhx_expr* expr, const double* values,
                                         size_t n_values, double* out);
HHINVEX_API hhx_status hhx_expr_differentiate(const hhx_expr* expr, const char* variable,
                                              hhx_expr** out);
/* Text that parses back to a structurally identical expression. */
HHINVEX_API hhx_status hhx_expr_render(const hhx_expr* expr, char** out);
/* Lisp-style AST dump. */
HHINVEX_API hhx_status hhx_expr_sexpr(const hhx_expr* expr, char** out);

/* ------------------------------------------------------------------ */
/* Class certification and structural checks                           */

/* target_class: "preinvex", "log-preinvex" or "prequasiinvex".
 * grid <= 0 selects the default 64 (t axis grid/2+1); tolerance <= 0 selects 1e-9.
 * *certified: 1 when certified, 0 when refuted (status HHX_OK either way). */
HHINVEX_API hhx_status hhx_classify(const char* f_src, const char* eta_src, double lo, double hi,
                                    const char* target_class, int grid, double tolerance,
                                    char** report_json, int* certified);

/* Condition C residual check for a scalar eta over [lo, hi]; grid <= 0 -> 9. */
HHINVEX_API hhx_status hhx_check_condition_c(const char* eta_src, double lo, double hi, int grid,
                                             char** report_json, int* pass);

/* ------------------------------------------------------------------ */
/* Bound verification                                                  */

/* theorems: names from {HHchain, T1.2, T2.2, T2.3, T3.1..T3.5, Tz, Tfd, Cq, Cq1}.
 * fprime_src may be NULL (symbolic differentiation), p/q NaN when unset,
 * quad_tol <= 0 -> 1e-10, format "json" or "csv". */
HHINVEX_API hhx_status hhx_verify(const char* f_src, const char* fprime_src, const char* eta_src,
                                  double a, double b, const char* const* theorems,
                                  size_t n_theorems, double p, double q, double quad_tol,
                                  const char* format, char** report_out, int* n_holds,
                                  int* n_violated, int* n_inconclusive);

/* theorem: "Eq1" or "Eq2"; x, y are dim-vectors; eta_src is a scalar
 * expression in (v, u) broadcast componentwise or ';'-separated components
 * in (v1..vn, u1..un). *verdict: 0 holds, 1 violated, 2 inconclusive. */
HHINVEX_API hhx_status hhx_multivar_verify(const char* f_src, const char* eta_src,
                                           const double* x, const double* y, size_t dim, double a,
                                           double b, const char* theorem, double p, double q,
                                           double quad_tol, char** report_json, int* verdict);

/* ------------------------------------------------------------------ */
/* Campaigns                                                           */

/* config_json: see docs/campaign.example.json. Outputs are byte-identical
 * for identical config and seed. n_violations counts confirmed violations
 * (including paper-as-printed ones). */
HHINVEX_API hhx_status hhx_campaign_run(const char* config_json, char** summary_json,
                                        char** trials_csv, long long* n_violations);

#ifdef __cplusplus
}
#endif

#endif /* HHINVEX_H */
