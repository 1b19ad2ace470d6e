#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <string>

#include "json.hpp"
#include "report.hpp"

using namespace hhinvex;
using njson = nlohmann::json;

namespace {

// Small JSON-Schema subset validator: type, required, properties, items,
// enum, $ref into #/definitions. Enough for the shipped report schema.
bool validate(const njson& schema, const njson& doc, const njson& root, std::string& why);

bool type_matches(const std::string& type, const njson& doc) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "boolean") return doc.is_boolean();
    if (type == "integer") return doc.is_number_integer();
    if (type == "number") return doc.is_number();
    return false;
}

const njson& deref(const njson& schema, const njson& root) {
    if (schema.contains("$ref")) {
        std::string ref = schema["$ref"].get<std::string>();
        const std::string prefix = "#/definitions/";
        REQUIRE(ref.rfind(prefix, 0) == 0);
        return root["definitions"][ref.substr(prefix.size())];
    }
    return schema;
}

bool validate(const njson& schema_in, const njson& doc, const njson& root, std::string& why) {
    const njson& schema = deref(schema_in, root);
    if (schema.contains("type") &&
        !type_matches(schema["type"].get<std::string>(), doc)) {
        why = "type mismatch, expected " + schema["type"].get<std::string>();
        return false;
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema["enum"]) ok = ok || v == doc;
        if (!ok) {
            why = "value not in enum: " + doc.dump();
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!doc.contains(key.get<std::string>())) {
                why = "missing required key " + key.get<std::string>();
                return false;
            }
        }
    }
    if (schema.contains("properties") && doc.is_object()) {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (schema["properties"].contains(it.key())) {
                if (!validate(schema["properties"][it.key()], it.value(), root, why)) {
                    why = it.key() + ": " + why;
                    return false;
                }
            }
        }
    }
    if (schema.contains("items") && doc.is_array()) {
        for (const auto& item : doc) {
            if (!validate(schema["items"], item, root, why)) {
                why = "item: " + why;
                return false;
            }
        }
    }
    return true;
}

njson load_schema() {
    std::ifstream in(std::string(HHINVEX_SOURCE_DIR) + "/docs/report.schema.json");
    REQUIRE(in.good());
    return njson::parse(in);
}

BoundEvaluation sample_eval() {
    const ScalarFunction f = ScalarFunction::from_expression("x^2");
    const EtaMap eta = EtaMap::scalar("v - u");
    return verify(TheoremId::T34, f, eta, 0.0, 1.0, {{}, 2.0});
}

}  // namespace

TEST_CASE("doubles serialize with 17 significant digits, lowercase e-notation") {
    CHECK(format_double(0.25) == "2.5000000000000000e-01");
    CHECK(format_double(1.0 / 3.0) == "3.3333333333333331e-01");
    CHECK(format_double(0.0) == "0.0000000000000000e+00");
    CHECK(format_double(-12345.678) == "-1.2345678000000000e+04");
    CHECK(format_double(1e-300) == "1.0000000000000000e-300");
}

TEST_CASE("json emitter: sorted keys, escaping, deterministic output") {
    Json j = Json::object();
    j["zeta"] = Json(1);
    j["alpha"] = Json("a\"b\\c\nd");
    j["mid"] = Json(0.5);
    Json arr = Json::array();
    arr.push_back(Json(true));
    arr.push_back(Json());
    j["list"] = arr;

    const std::string compact = j.dump(-1);
    CHECK(compact ==
          "{\"alpha\": \"a\\\"b\\\\c\\nd\",\"list\": [true,null],\"mid\": "
          "5.0000000000000000e-01,\"zeta\": 1}");
    CHECK(j.dump(2) == j.dump(2));

    // keys come out sorted regardless of insertion order
    CHECK(compact.find("alpha") < compact.find("list"));
    CHECK(compact.find("list") < compact.find("mid"));
    CHECK(compact.find("mid") < compact.find("zeta"));

    // emitted documents parse back with a standard JSON parser
    njson parsed = njson::parse(j.dump(2));
    CHECK(parsed["zeta"] == 1);
    CHECK(parsed["alpha"] == "a\"b\\c\nd");
    CHECK(parsed["mid"] == 0.5);
}

TEST_CASE("verify reports validate against the shipped schema") {
    const njson schema = load_schema();
    std::vector<BoundEvaluation> evals = {sample_eval()};
    const ScalarFunction f = ScalarFunction::from_expression("x^2");
    const EtaMap eta = EtaMap::scalar("v - u");
    evals.push_back(verify(TheoremId::HHchain, f, eta, 0.0, 1.0));
    evals.push_back(verify(TheoremId::T22, f, eta, 0.0, 1.0, {2.0, {}}));

    VerifyEcho echo{"x^2", "", "v - u", 0.0, 1.0, std::nullopt, 2.0, 1e-10};
    Json report = build_verify_report(echo, evals);
    njson doc = njson::parse(report.dump(2));
    std::string why;
    CHECK_MESSAGE(validate(schema, doc, schema, why), why);
    CHECK(doc["evaluations"].size() == 3);
    CHECK(doc["summary"]["holds"] == 3);
}

TEST_CASE("classify and multivar reports validate against the shipped schema") {
    const njson schema = load_schema();
    const EtaMap eta = EtaMap::scalar("v - u");
    ClassCertificate cert =
        classify([](double x) { return x * x; }, eta, -1.0, 1.0, ConvexClass::Preinvex,
                 Grid3{17, 17, 9});
    Json report = build_classify_report("x^2", "v - u", -1.0, 1.0, cert);
    std::string why;
    njson doc = njson::parse(report.dump(2));
    CHECK_MESSAGE(validate(schema, doc, schema, why), why);
    CHECK(doc["certificates"][0]["claimed_class"] == "preinvex");

    MultivarEcho mecho{"exp(x1)", "v - u", {0.1}, {0.9}, 0.2, 0.8, std::nullopt, std::nullopt,
                       1e-10};
    ScalarFunction phi_fn = ScalarFunction::from_expression("exp(x)");
    BoundEvaluation ev = verify(TheoremId::Tz, phi_fn, eta, 0.2, 0.8);
    ev.id = TheoremId::Eq1;  // shape check only
    Json mreport = build_multivar_report(mecho, TheoremId::Eq1, cert, ev);
    njson mdoc = njson::parse(mreport.dump(2));
    CHECK_MESSAGE(validate(schema, mdoc, schema, why), why);
}

TEST_CASE("verify csv column order is fixed") {
    std::vector<BoundEvaluation> evals = {sample_eval()};
    const std::string csv = verify_csv(evals);
    CHECK(csv.rfind("theorem,a,b,p,q,eta_ba,lhs,rhs,margin,error_budget,verdict\n", 0) == 0);
    CHECK(csv.find("T3.4") != std::string::npos);
    CHECK(csv.find("holds") != std::string::npos);
    // unset p stays an empty cell
    CHECK(csv.find("T3.4,0.0") != std::string::npos);
}

TEST_CASE("condition C report embeds the residual block") {
    const EtaMap eta = EtaMap::scalar("v + u");
    ConditionCReport cc = check_condition_c(eta, Box::interval(0.0, 1.0), 5);
    Json j = build_condition_c_report("v + u", cc);
    njson doc = njson::parse(j.dump(2));
    CHECK(doc["condition_c"]["pass"] == false);
    CHECK(doc["condition_c"].contains("worst_residual"));
}
