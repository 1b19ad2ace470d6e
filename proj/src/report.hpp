#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "invex.hpp"

namespace hhinvex {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1";

// 17 significant digits, lowercase scientific notation; enough to round-trip
// any double bit-exactly and stable across runs.
std::string format_double(double v);

// Minimal JSON document tree with deterministic serialization: object keys
// are emitted in sorted order and all doubles go through format_double.
// (Configs are parsed with nlohmann/json; reports are emitted through this
// so the byte-stability contract is explicit.)
class Json {
public:
    enum class Type { Null, Bool, Int, Double, String, Array, Object };

    Json() : type_(Type::Null) {}
    Json(bool b) : type_(Type::Bool), bool_(b) {}
    Json(int i) : type_(Type::Int), int_(i) {}
    Json(long long i) : type_(Type::Int), int_(i) {}
    Json(double d) : type_(Type::Double), double_(d) {}
    Json(const char* s) : type_(Type::String), string_(s) {}
    Json(std::string s) : type_(Type::String), string_(std::move(s)) {}

    static Json object() {
        Json j;
        j.type_ = Type::Object;
        return j;
    }
    static Json array() {
        Json j;
        j.type_ = Type::Array;
        return j;
    }

    Json& operator[](const std::string& key);
    void push_back(Json v);

    Type type() const { return type_; }
    bool contains(const std::string& key) const;
    std::size_t size() const;

    std::string dump(int indent = 2) const;

private:
    void write(std::string& out, int indent, int depth) const;

    Type type_;
    bool bool_ = false;
    long long int_ = 0;
    double double_ = 0.0;
    std::string string_;
    std::vector<Json> array_;
    std::map<std::string, Json> object_;
};

std::string json_escape(const std::string& s);

// ---------------------------------------------------------------------------
// Report fragments

Json report_skeleton(const std::string& command_echo);
Json certificate_json(const ClassCertificate& cert);
Json condition_c_json(const ConditionCReport& report);
Json chain_json(const ChainEvaluation& chain);
Json bound_evaluation_json(const BoundEvaluation& ev);

// ---------------------------------------------------------------------------
// Whole report documents (the JSON the CLI prints; see docs/report.schema.json)

struct VerifyEcho {
    std::string f_src;
    std::string fprime_src;  // empty when the derivative is symbolic
    std::string eta_src;
    double a = 0.0, b = 0.0;
    std::optional<double> p, q;
    double quad_tol = 0.0;
};

Json build_verify_report(const VerifyEcho& echo, const std::vector<BoundEvaluation>& evals);
std::string verify_csv(const std::vector<BoundEvaluation>& evals);

Json build_classify_report(const std::string& f_src, const std::string& eta_src, double lo,
                           double hi, const ClassCertificate& cert);

struct MultivarEcho {
    std::string f_src;
    std::string eta_src;
    std::vector<double> x, y;
    double a = 0.0, b = 0.0;
    std::optional<double> p, q;
    double quad_tol = 0.0;
};

Json build_multivar_report(const MultivarEcho& echo, TheoremId id, const ClassCertificate& cert,
                           const BoundEvaluation& eval);

Json build_condition_c_report(const std::string& eta_src, const ConditionCReport& report);

}  // namespace hhinvex
