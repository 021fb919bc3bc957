#include "acqlab/instance_io.hpp"

#include <fstream>
#include <sstream>

namespace acqlab {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidInstance, msg); }

std::vector<Constraint> constraints_from(const json& arr, const char* field) {
    if (!arr.is_array()) bad(std::string("field '") + field + "' must be an array");
    std::vector<Constraint> out;
    out.reserve(arr.size());
    for (const auto& j : arr) out.push_back(constraint_from_json(j));
    return out;
}

json constraints_to(std::span<const Constraint> cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back(constraint_to_json(c));
    return arr;
}

}  // namespace

json relation_to_json(const RelationTemplate& r) {
    json j{{"kind", std::string(relation_name(r.kind))}, {"params", json::array()}};
    if (takes_param(r.kind)) j["params"].push_back(r.param);
    return j;
}

RelationTemplate relation_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) bad("relation needs a string 'kind'");
    auto kind = parse_relation(j["kind"].get<std::string>());
    if (!kind) bad("unknown relation kind '" + j["kind"].get<std::string>() + "'");
    RelationTemplate r{*kind, 0};
    if (takes_param(*kind)) {
        if (!j.contains("params") || !j["params"].is_array() || j["params"].size() != 1 ||
            !j["params"][0].is_number_integer())
            bad(std::string(relation_name(*kind)) + " needs exactly one integer param");
        r.param = j["params"][0].get<Value>();
    }
    return r;
}

json constraint_to_json(const Constraint& c) {
    json j = relation_to_json(c.relation());
    j["scope"] = std::vector<VarId>(c.scope().begin(), c.scope().end());
    return j;
}

Constraint constraint_from_json(const json& j) {
    RelationTemplate r = relation_from_json(j);
    if (!j.contains("scope") || !j["scope"].is_array()) bad("constraint needs a 'scope' array");
    std::vector<VarId> scope;
    for (const auto& v : j["scope"]) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad("scope entries must be non-negative integers");
        scope.push_back(v.get<VarId>());
    }
    try {
        return Constraint(r, scope);
    } catch (const Error& e) {
        bad(e.what());
    }
}

json instance_to_json(const Instance& inst) {
    json j;
    if (!inst.name.empty()) j["name"] = inst.name;
    j["variables"] = inst.vocab.size();
    if (inst.vocab.uniform_domains()) {
        auto d = inst.vocab.domain(0);
        bool contiguous = true;
        for (std::size_t i = 1; i < d.size(); ++i) contiguous = contiguous && d[i] == d[i - 1] + 1;
        if (contiguous)
            j["domains"] = {{"min", d.front()}, {"max", d.back()}};
    }
    if (!j.contains("domains")) {
        json doms = json::array();
        for (VarId x = 0; x < inst.vocab.size(); ++x) {
            auto d = inst.vocab.domain(x);
            doms.push_back(std::vector<Value>(d.begin(), d.end()));
        }
        j["domains"] = doms;
    }
    j["language"] = json::array();
    for (const auto& r : inst.language) j["language"].push_back(relation_to_json(r));
    j["target"] = constraints_to(inst.target);
    if (inst.bias) j["bias"] = constraints_to(*inst.bias);
    if (inst.learned) j["learned"] = constraints_to(*inst.learned);
    if (!inst.var_names.empty()) j["var_names"] = inst.var_names;
    return j;
}

Instance instance_from_json(const json& j) {
    if (!j.is_object()) bad("instance must be a JSON object");
    Instance inst;
    if (j.contains("name") && j["name"].is_string()) inst.name = j["name"].get<std::string>();
    if (!j.contains("variables") || !j["variables"].is_number_integer() || j["variables"].get<std::int64_t>() < 1)
        bad("'variables' must be a positive integer");
    const auto n = j["variables"].get<std::size_t>();
    if (!j.contains("domains")) bad("missing 'domains'");
    const json& d = j["domains"];
    try {
        if (d.is_object()) {
            if (!d.contains("min") || !d.contains("max")) bad("shared domain range needs 'min' and 'max'");
            inst.vocab = Vocabulary::uniform(n, d["min"].get<Value>(), d["max"].get<Value>());
        } else if (d.is_array()) {
            if (d.size() != n) bad("'domains' must list one domain per variable");
            std::vector<std::vector<Value>> doms;
            for (const auto& dom : d) doms.push_back(dom.get<std::vector<Value>>());
            inst.vocab = Vocabulary(std::move(doms));
        } else {
            bad("'domains' must be a range object or a list of lists");
        }
    } catch (const json::exception& e) {
        bad(std::string("bad domains: ") + e.what());
    } catch (const Error& e) {
        bad(e.what());
    }
    if (j.contains("language")) {
        if (!j["language"].is_array()) bad("'language' must be an array");
        for (const auto& r : j["language"]) inst.language.push_back(relation_from_json(r));
    }
    if (j.contains("target")) inst.target = constraints_from(j["target"], "target");
    if (j.contains("bias")) inst.bias = constraints_from(j["bias"], "bias");
    if (j.contains("learned")) inst.learned = constraints_from(j["learned"], "learned");
    if (j.contains("var_names")) inst.var_names = j["var_names"].get<std::vector<std::string>>();
    if (inst.language.empty() && !inst.bias) bad("instance needs a 'language' or an explicit 'bias'");
    inst.validate();
    return inst;
}

Instance parse_instance(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    return instance_from_json(j);
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << instance_to_json(inst).dump(1) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

json assignment_to_json(const Assignment& e) {
    json arr = json::array();
    for (VarId x = 0; x < e.num_vars(); ++x) {
        if (e.is_assigned(x))
            arr.push_back(e.at(x));
        else
            arr.push_back(nullptr);
    }
    return arr;
}

Assignment assignment_from_json(const json& j, std::size_t n) {
    if (!j.is_array() || j.size() != n)
        throw Error(ErrorCode::InvalidArgument, "assignment must list every variable");
    Assignment e(n);
    for (VarId x = 0; x < n; ++x)
        if (!j[x].is_null()) e.set(x, j[x].get<Value>());
    return e;
}

}  // namespace acqlab
