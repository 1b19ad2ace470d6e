#include "report.hpp"

#include <cstdio>

namespace hhinvex {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

Json& Json::operator[](const std::string& key) {
    if (type_ == Type::Null) type_ = Type::Object;
    if (type_ != Type::Object) throw Error("json: not an object");
    return object_[key];
}

void Json::push_back(Json v) {
    if (type_ == Type::Null) type_ = Type::Array;
    if (type_ != Type::Array) throw Error("json: not an array");
    array_.push_back(std::move(v));
}

bool Json::contains(const std::string& key) const {
    return type_ == Type::Object && object_.count(key) > 0;
}

std::size_t Json::size() const {
    if (type_ == Type::Array) return array_.size();
    if (type_ == Type::Object) return object_.size();
    return 0;
}

void Json::write(std::string& out, int indent, int depth) const {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (type_) {
        case Type::Null: out += "null"; return;
        case Type::Bool: out += bool_ ? "true" : "false"; return;
        case Type::Int: out += std::to_string(int_); return;
        case Type::Double: out += format_double(double_); return;
        case Type::String:
            out += '"';
            out += json_escape(string_);
            out += '"';
            return;
        case Type::Array: {
            if (array_.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& v : array_) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                v.write(out, indent, depth + 1);
            }
            newline(depth);
            out += ']';
            return;
        }
        case Type::Object: {
            if (object_.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [k, v] : object_) {  // std::map: sorted keys
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += '"';
                out += json_escape(k);
                out += "\": ";
                v.write(out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
    }
}

std::string Json::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    if (indent >= 0) out += '\n';
    return out;
}

// ---------------------------------------------------------------------------

Json report_skeleton(const std::string& command_echo) {
    Json j = Json::object();
    j["schema_version"] = Json(kSchemaVersion);
    j["tool_version"] = Json(kToolVersion);
    j["command"] = Json(command_echo);
    return j;
}

Json certificate_json(const ClassCertificate& cert) {
    Json j = Json::object();
    j["kind"] = Json("sampled certificate");
    j["target_class"] = Json(class_name(cert.target));
    j["certified"] = Json(cert.certified);
    j["claimed_class"] = Json(cert.claimed());
    Json grid = Json::object();
    grid["nu"] = Json(cert.grid.nu);
    grid["nv"] = Json(cert.grid.nv);
    grid["nt"] = Json(cert.grid.nt);
    j["grid"] = grid;
    j["tolerance"] = Json(cert.tolerance);
    j["worst_margin"] = Json(cert.worst_margin);
    Json w = Json::object();
    w["u"] = Json(cert.witness.u);
    w["v"] = Json(cert.witness.v);
    w["t"] = Json(cert.witness.t);
    j["witness"] = w;
    j["refined"] = Json(cert.refined);
    return j;
}

Json condition_c_json(const ConditionCReport& report) {
    Json j = Json::object();
    j["pass"] = Json(report.pass);
    j["worst_residual"] = Json(report.worst_residual);
    j["tolerance"] = Json(report.tolerance);
    j["identity"] = Json(report.identity);
    Json wx = Json::array();
    for (double v : report.witness_x) wx.push_back(Json(v));
    Json wy = Json::array();
    for (double v : report.witness_y) wy.push_back(Json(v));
    j["witness_x"] = wx;
    j["witness_y"] = wy;
    j["witness_t"] = Json(report.witness_t);
    if (report.witness_t2) j["witness_t2"] = Json(*report.witness_t2);
    return j;
}

Json chain_json(const ChainEvaluation& chain) {
    Json j = Json::object();
    j["midpoint_value"] = Json(chain.midpoint_value);
    j["mean_value"] = Json(chain.mean_value);
    j["trapezoid_value"] = Json(chain.trapezoid_value);
    j["endpoint_mean"] = Json(chain.endpoint_mean);
    j["quad_error"] = Json(chain.quad_error);
    j["min_slack"] = Json(chain.min_slack);
    j["holds"] = Json(chain.holds);
    return j;
}

Json bound_evaluation_json(const BoundEvaluation& ev) {
    Json j = Json::object();
    j["theorem"] = Json(theorem_name(ev.id));
    j["a"] = Json(ev.a);
    j["b"] = Json(ev.b);
    if (ev.params.p) j["p"] = Json(*ev.params.p);
    if (ev.params.q) j["q"] = Json(*ev.params.q);
    j["eta_ba"] = Json(ev.eta_ba);
    j["lhs"] = Json(ev.lhs);
    j["rhs"] = Json(ev.rhs);
    j["margin"] = Json(ev.margin);
    j["error_budget"] = Json(ev.error_budget);
    j["verdict"] = Json(verdict_name(ev.verdict));
    j["as_printed"] = Json(ev.as_printed);
    if (!ev.note.empty()) j["note"] = Json(ev.note);
    if (ev.chain) j["chain"] = chain_json(*ev.chain);
    return j;
}

// ---------------------------------------------------------------------------
// Whole documents

Json build_verify_report(const VerifyEcho& echo, const std::vector<BoundEvaluation>& evals) {
    Json report =
        report_skeleton("verify --f \"" + echo.f_src + "\" --eta \"" + echo.eta_src + "\"");
    Json inputs = Json::object();
    inputs["f"] = Json(echo.f_src);
    if (!echo.fprime_src.empty()) inputs["fprime"] = Json(echo.fprime_src);
    inputs["eta"] = Json(echo.eta_src);
    inputs["a"] = Json(echo.a);
    inputs["b"] = Json(echo.b);
    if (echo.p) inputs["p"] = Json(*echo.p);
    if (echo.q) inputs["q"] = Json(*echo.q);
    inputs["quad_tol"] = Json(echo.quad_tol);
    report["inputs"] = inputs;

    Json evs = Json::array();
    int holds = 0, violated = 0, inconclusive = 0;
    for (const auto& ev : evals) {
        evs.push_back(bound_evaluation_json(ev));
        if (ev.verdict == Verdict::Holds) ++holds;
        else if (ev.verdict == Verdict::Violated) ++violated;
        else ++inconclusive;
    }
    report["evaluations"] = evs;
    Json summary = Json::object();
    summary["holds"] = Json(holds);
    summary["violated"] = Json(violated);
    summary["inconclusive"] = Json(inconclusive);
    report["summary"] = summary;
    return report;
}

std::string verify_csv(const std::vector<BoundEvaluation>& evals) {
    std::string csv = "theorem,a,b,p,q,eta_ba,lhs,rhs,margin,error_budget,verdict\n";
    for (const auto& ev : evals) {
        csv += theorem_name(ev.id);
        csv += ',';
        csv += format_double(ev.a);
        csv += ',';
        csv += format_double(ev.b);
        csv += ',';
        if (ev.params.p) csv += format_double(*ev.params.p);
        csv += ',';
        if (ev.params.q) csv += format_double(*ev.params.q);
        csv += ',';
        csv += format_double(ev.eta_ba);
        csv += ',';
        csv += format_double(ev.lhs);
        csv += ',';
        csv += format_double(ev.rhs);
        csv += ',';
        csv += format_double(ev.margin);
        csv += ',';
        csv += format_double(ev.error_budget);
        csv += ',';
        csv += verdict_name(ev.verdict);
        csv += '\n';
    }
    return csv;
}

Json build_classify_report(const std::string& f_src, const std::string& eta_src, double lo,
                           double hi, const ClassCertificate& cert) {
    Json report = report_skeleton("classify --f \"" + f_src + "\" --eta \"" + eta_src +
                                  "\" --target " + class_name(cert.target));
    Json inputs = Json::object();
    inputs["f"] = Json(f_src);
    inputs["eta"] = Json(eta_src);
    Json dom = Json::object();
    dom["lo"] = Json(lo);
    dom["hi"] = Json(hi);
    inputs["domain"] = dom;
    inputs["target"] = Json(class_name(cert.target));
    report["inputs"] = inputs;
    Json certs = Json::array();
    certs.push_back(certificate_json(cert));
    report["certificates"] = certs;
    Json summary = Json::object();
    summary["certified"] = Json(cert.certified);
    report["summary"] = summary;
    return report;
}

Json build_multivar_report(const MultivarEcho& echo, TheoremId id, const ClassCertificate& cert,
                           const BoundEvaluation& eval) {
    Json report = report_skeleton("multivar --f \"" + echo.f_src + "\" --eta \"" + echo.eta_src +
                                  "\" --theorem " + theorem_name(id));
    Json inputs = Json::object();
    inputs["f"] = Json(echo.f_src);
    inputs["eta"] = Json(echo.eta_src);
    Json xv = Json::array();
    for (double v : echo.x) xv.push_back(Json(v));
    Json yv = Json::array();
    for (double v : echo.y) yv.push_back(Json(v));
    inputs["x"] = xv;
    inputs["y"] = yv;
    inputs["a"] = Json(echo.a);
    inputs["b"] = Json(echo.b);
    inputs["theorem"] = Json(theorem_name(id));
    if (echo.p) inputs["p"] = Json(*echo.p);
    if (echo.q) inputs["q"] = Json(*echo.q);
    inputs["quad_tol"] = Json(echo.quad_tol);
    report["inputs"] = inputs;
    Json certs = Json::array();
    certs.push_back(certificate_json(cert));
    report["certificates"] = certs;
    Json evs = Json::array();
    evs.push_back(bound_evaluation_json(eval));
    report["evaluations"] = evs;
    Json summary = Json::object();
    summary["verdict"] = Json(verdict_name(eval.verdict));
    report["summary"] = summary;
    return report;
}

Json build_condition_c_report(const std::string& eta_src, const ConditionCReport& report) {
    Json j = report_skeleton("condition-c --eta \"" + eta_src + "\"");
    j["condition_c"] = condition_c_json(report);
    return j;
}

}  // namespace hhinvex
