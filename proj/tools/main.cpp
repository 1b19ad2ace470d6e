#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hhinvex/hhinvex.h"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string part = text.substr(start, comma == std::string::npos ? comma : comma - start);
        // trim spaces
        std::size_t b = part.find_first_not_of(" \t");
        std::size_t e = part.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(part.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_point(const std::string& text, std::vector<double>& out) {
    out.clear();
    for (const std::string& part : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) return false;
        } catch (const std::exception&) {
            return false;
        }
    }
    return !out.empty();
}

int fail(const std::string& context) {
    std::cerr << "error: " << context;
    const char* detail = hhx_last_error();
    if (detail && *detail) std::cerr << ": " << detail;
    std::cerr << "\n";
    return 1;
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { hhx_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

// ---------------------------------------------------------------------------

int cmd_parse(const std::string& expr, const std::string& vars_csv) {
    std::vector<std::string> vars = split_list(vars_csv);
    if (vars.empty()) {
        std::cerr << "error: --vars must name at least one variable\n";
        return 1;
    }
    std::vector<const char*> var_ptrs;
    for (const auto& v : vars) var_ptrs.push_back(v.c_str());

    hhx_expr* e = nullptr;
    if (hhx_expr_parse(expr.c_str(), var_ptrs.data(), var_ptrs.size(), &e) != HHX_OK)
        return fail("parse failed (offset " + std::to_string(hhx_last_error_offset()) + ")");

    OwnedString rendered, sexpr;
    hhx_expr_render(e, &rendered.ptr);
    hhx_expr_sexpr(e, &sexpr.ptr);
    std::cout << "expression: " << rendered.str() << "\n";
    std::cout << "ast: " << sexpr.str() << "\n";

    for (const auto& v : vars) {
        hhx_expr* d = nullptr;
        if (hhx_expr_differentiate(e, v.c_str(), &d) != HHX_OK) {
            hhx_expr_free(e);
            return fail("differentiation with respect to " + v + " failed");
        }
        OwnedString ds;
        hhx_expr_render(d, &ds.ptr);
        std::cout << "derivative d/d" << v << ": " << ds.str() << "\n";
        hhx_expr_free(d);
    }
    hhx_expr_free(e);
    return 0;
}

int cmd_classify(const std::string& f, const std::string& eta, double lo, double hi,
                 const std::string& target, int grid, double tol) {
    OwnedString report;
    int certified = 0;
    if (hhx_classify(f.c_str(), eta.c_str(), lo, hi, target.c_str(), grid, tol, &report.ptr,
                     &certified) != HHX_OK)
        return fail("classification failed");
    std::cout << report.str();
    return certified ? 0 : 2;
}

int cmd_verify(const std::string& f, const std::string& fprime, const std::string& eta, double a,
               double b, const std::string& theorems_csv, double p, double q, double quad_tol,
               const std::string& out_format) {
    std::vector<std::string> names = split_list(theorems_csv);
    if (names.empty()) {
        std::cerr << "error: --theorems must name at least one theorem\n";
        return 1;
    }
    std::vector<const char*> name_ptrs;
    for (const auto& n : names) name_ptrs.push_back(n.c_str());

    OwnedString report;
    int holds = 0, violated = 0, inconclusive = 0;
    hhx_status status = hhx_verify(f.c_str(), fprime.empty() ? nullptr : fprime.c_str(),
                                   eta.c_str(), a, b, name_ptrs.data(), name_ptrs.size(), p, q,
                                   quad_tol, out_format.c_str(), &report.ptr, &holds, &violated,
                                   &inconclusive);
    if (status != HHX_OK) return fail("verification failed");
    std::cout << report.str();
    if (violated > 0) return 2;
    if (inconclusive > 0) return 3;
    return 0;
}

int cmd_multivar(const std::string& f, const std::string& x_csv, const std::string& y_csv,
                 const std::string& eta, double a, double b, const std::string& theorem, double p,
                 double q, double quad_tol) {
    std::vector<double> x, y;
    if (!parse_point(x_csv, x) || !parse_point(y_csv, y) || x.size() != y.size()) {
        std::cerr << "error: --x and --y must be comma-separated reals of equal length\n";
        return 1;
    }
    OwnedString report;
    int verdict = 0;
    hhx_status status =
        hhx_multivar_verify(f.c_str(), eta.c_str(), x.data(), y.data(), x.size(), a, b,
                            theorem.c_str(), p, q, quad_tol, &report.ptr, &verdict);
    if (status != HHX_OK) return fail("multivar verification failed");
    std::cout << report.str();
    if (verdict == 1) return 2;
    if (verdict == 2) return 3;
    return 0;
}

int cmd_campaign(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 1;
    }
    std::string config((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    OwnedString summary, csv;
    long long violations = 0;
    if (hhx_campaign_run(config.c_str(), &summary.ptr, &csv.ptr, &violations) != HHX_OK)
        return fail("campaign failed");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << out_dir << "\n";
        return 1;
    }
    const std::string summary_path = out_dir + "/summary.json";
    const std::string csv_path = out_dir + "/trials.csv";
    {
        std::ofstream s(summary_path, std::ios::binary);
        s << summary.str();
        if (!s) {
            std::cerr << "error: cannot write " << summary_path << "\n";
            return 1;
        }
    }
    {
        std::ofstream t(csv_path, std::ios::binary);
        t << csv.str();
        if (!t) {
            std::cerr << "error: cannot write " << csv_path << "\n";
            return 1;
        }
    }
    std::cout << "summary: " << summary_path << "\n";
    std::cout << "trials:  " << csv_path << "\n";
    std::cout << "violations: " << violations << "\n";
    return violations > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hhinvex: sampled certificates for generalized convexity classes and "
                 "verification of Hermite-Hadamard-type midpoint bounds along eta-paths"};
    app.require_subcommand(1);
    app.set_version_flag("--version", hhx_version());

    // parse
    std::string p_expr, p_vars = "x";
    auto* parse_cmd = app.add_subcommand("parse", "parse an expression, dump AST and derivative");
    parse_cmd->add_option("--expr", p_expr, "expression source")->required();
    parse_cmd->add_option("--vars", p_vars, "comma-separated variable names (default: x)");

    // classify
    std::string c_f, c_eta, c_target;
    std::vector<double> c_domain;
    int c_grid = 64;
    double c_tol = 1e-9;
    auto* classify_cmd =
        app.add_subcommand("classify", "certify or refute a generalized convexity class");
    classify_cmd->add_option("--f", c_f, "function expression in x")->required();
    classify_cmd->add_option("--eta", c_eta, "eta(v,u) expression")->required();
    classify_cmd->add_option("--domain", c_domain, "interval lo hi")->expected(2)->required();
    classify_cmd
        ->add_option("--target", c_target, "preinvex | log-preinvex | prequasiinvex")
        ->required();
    classify_cmd->add_option("--grid", c_grid, "grid points per axis (t axis uses grid/2+1)");
    classify_cmd->add_option("--tol", c_tol, "certification tolerance");

    // verify
    std::string v_f, v_fprime, v_eta = "v - u", v_theorems, v_out = "json";
    double v_a = 0.0, v_b = 0.0;
    double v_p = std::nan(""), v_q = std::nan(""), v_quad_tol = 1e-10;
    auto* verify_cmd = app.add_subcommand("verify", "verify midpoint/trapezoid bounds");
    verify_cmd->add_option("--f", v_f, "function expression in x")->required();
    verify_cmd->add_option("--fprime", v_fprime, "derivative override expression");
    verify_cmd->add_option("--eta", v_eta, "eta(v,u) expression (default: v - u)");
    verify_cmd->add_option("--a", v_a, "left endpoint")->required();
    verify_cmd->add_option("--b", v_b, "second argument of eta")->required();
    verify_cmd->add_option("--theorems", v_theorems, "comma-separated theorem ids")->required();
    verify_cmd->add_option("--p", v_p, "Hoelder exponent (p > 1)");
    verify_cmd->add_option("--q", v_q, "power-mean exponent (q >= 1)");
    verify_cmd->add_option("--quad-tol", v_quad_tol, "quadrature tolerance");
    verify_cmd->add_option("--out", v_out, "json | csv");

    // multivar
    std::string m_f, m_x, m_y, m_eta = "v - u", m_theorem;
    double m_a = 0.0, m_b = 0.0;
    double m_p = std::nan(""), m_q = std::nan(""), m_quad_tol = 1e-10;
    auto* multivar_cmd = app.add_subcommand("multivar", "verify the eta-path bounds Eq1/Eq2");
    multivar_cmd->add_option("--f", m_f, "function expression in x1..xn")->required();
    multivar_cmd->add_option("--x", m_x, "base point, comma-separated reals")->required();
    multivar_cmd->add_option("--y", m_y, "target point, comma-separated reals")->required();
    multivar_cmd->add_option("--eta", m_eta,
                             "scalar eta(v,u) broadcast componentwise, or ';'-separated "
                             "components in v1..vn,u1..un");
    multivar_cmd->add_option("--a", m_a, "left endpoint in (0,1)")->required();
    multivar_cmd->add_option("--b", m_b, "right endpoint in (0,1)")->required();
    multivar_cmd->add_option("--theorem", m_theorem, "Eq1 | Eq2")->required();
    multivar_cmd->add_option("--p", m_p, "Hoelder exponent (Eq2)");
    multivar_cmd->add_option("--q", m_q, "conjugate exponent (Eq2)");
    multivar_cmd->add_option("--quad-tol", m_quad_tol, "quadrature tolerance");

    // campaign
    std::string g_config, g_out;
    auto* campaign_cmd = app.add_subcommand("campaign", "run a randomized verification campaign");
    campaign_cmd->add_option("--config", g_config, "campaign config JSON file")->required();
    campaign_cmd->add_option("--out", g_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage errors are always exit 1
    }

    if (parse_cmd->parsed()) return cmd_parse(p_expr, p_vars);
    if (classify_cmd->parsed())
        return cmd_classify(c_f, c_eta, c_domain[0], c_domain[1], c_target, c_grid, c_tol);
    if (verify_cmd->parsed())
        return cmd_verify(v_f, v_fprime, v_eta, v_a, v_b, v_theorems, v_p, v_q, v_quad_tol, v_out);
    if (multivar_cmd->parsed())
        return cmd_multivar(m_f, m_x, m_y, m_eta, m_a, m_b, m_theorem, m_p, m_q, m_quad_tol);
    if (campaign_cmd->parsed()) return cmd_campaign(g_config, g_out);
    return 1;
}
