#include "multigroup/serialize.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace multigroup {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

std::vector<std::vector<int>> int_matrix(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) fail(what + ": expected an array of integer vectors");
    std::vector<std::vector<int>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) fail(what + ": expected an array of integer vectors");
        rows.push_back(row.get<std::vector<int>>());
    }
    return rows;
}

std::vector<std::string> names_or_empty(const nlohmann::json& j) {
    if (j.is_object() && j.contains("names")) {
        return j.at("names").get<std::vector<std::string>>();
    }
    return {};
}

}  // namespace

nlohmann::json to_json(const FiniteDistribution& dist) {
    return nlohmann::json{{"points", dist.num_points()},
                          {"mass", dist.mass},
                          {"labels", dist.labels},
                          {"label_dist", dist.label_dist}};
}

FiniteDistribution distribution_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail("distribution: expected a JSON object");
    for (const char* key : {"points", "mass", "labels", "label_dist"}) {
        if (!j.contains(key)) fail(std::string("distribution: missing field '") + key + "'");
    }
    FiniteDistribution dist;
    dist.mass = j.at("mass").get<std::vector<double>>();
    dist.labels = j.at("labels").get<std::vector<std::string>>();
    dist.label_dist = j.at("label_dist").get<std::vector<std::vector<double>>>();
    const auto points = j.at("points").get<std::int64_t>();
    if (points != static_cast<std::int64_t>(dist.mass.size())) {
        fail("distribution: 'points' does not match the mass vector length");
    }
    dist.validate();
    return dist;
}

nlohmann::json to_json(const HypothesisClass& H) {
    nlohmann::json rows = nlohmann::json::array();
    for (int h = 0; h < H.size(); ++h) {
        rows.push_back(H[h].outputs);
    }
    if (H.names.empty()) return rows;
    return nlohmann::json{{"hypotheses", std::move(rows)}, {"names", H.names}};
}

HypothesisClass hypotheses_from_json(const nlohmann::json& j) {
    const nlohmann::json& rows_json =
        (j.is_object() && j.contains("hypotheses")) ? j.at("hypotheses") : j;
    HypothesisClass H;
    H.names = names_or_empty(j);
    std::size_t width = 0;
    for (auto& row : int_matrix(rows_json, "hypotheses")) {
        if (H.hypotheses.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            fail("hypotheses: output vectors differ in length");
        }
        for (int z : row) {
            if (z < 0) fail("hypotheses: negative prediction id");
        }
        H.hypotheses.push_back(Hypothesis{std::move(row)});
    }
    if (H.hypotheses.empty()) fail("hypotheses: empty class");
    if (!H.names.empty() && static_cast<int>(H.names.size()) != H.size()) {
        fail("hypotheses: name count does not match");
    }
    return H;
}

nlohmann::json to_json(const GroupFamily& G) {
    nlohmann::json rows = nlohmann::json::array();
    for (int g = 0; g < G.size(); ++g) {
        std::vector<int> row(G[g].indicator().begin(), G[g].indicator().end());
        rows.push_back(std::move(row));
    }
    if (G.names.empty()) return rows;
    return nlohmann::json{{"groups", std::move(rows)}, {"names", G.names}};
}

GroupFamily groups_from_json(const nlohmann::json& j) {
    const nlohmann::json& rows_json = (j.is_object() && j.contains("groups")) ? j.at("groups") : j;
    GroupFamily G;
    G.names = names_or_empty(j);
    std::size_t width = 0;
    for (const auto& row : int_matrix(rows_json, "groups")) {
        if (G.groups.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            fail("groups: indicator vectors differ in length");
        }
        std::vector<std::uint8_t> ind;
        ind.reserve(row.size());
        for (int v : row) {
            if (v != 0 && v != 1) fail("groups: indicator entries must be 0 or 1");
            ind.push_back(static_cast<std::uint8_t>(v));
        }
        G.groups.emplace_back(std::move(ind));
    }
    if (G.groups.empty()) fail("groups: empty family");
    if (!G.names.empty() && static_cast<int>(G.names.size()) != G.size()) {
        fail("groups: name count does not match");
    }
    return G;
}

nlohmann::json to_json(const DecisionList& list) {
    nlohmann::json rules = nlohmann::json::array();
    for (const Rule& r : list.rules) {
        rules.push_back(nlohmann::json::array({r.group, r.hyp}));
    }
    return nlohmann::json{{"rules", std::move(rules)}, {"default", list.default_hyp}};
}

DecisionList decision_list_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rules") || !j.contains("default")) {
        fail("decision list: expected {\"rules\": [[group, hyp], ...], \"default\": hyp}");
    }
    DecisionList list;
    list.default_hyp = j.at("default").get<int>();
    for (const auto& pair : j.at("rules")) {
        if (!pair.is_array() || pair.size() != 2) {
            fail("decision list: each rule must be a [group, hyp] pair");
        }
        list.rules.push_back(Rule{pair.at(0).get<int>(), pair.at(1).get<int>()});
    }
    return list;
}

void save_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void save_sample_csv(const Sample& s, const std::filesystem::path& path) {
    if (!s.weights.empty()) {
        throw std::invalid_argument("save_sample_csv: weighted samples have no CSV form");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "index,point_id,label_id\n";
    for (const Example& e : s.examples) {
        out << e.index << ',' << e.x << ',' << e.y << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Sample load_sample_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "index,point_id,label_id") {
        throw std::runtime_error(path.string() + ": expected header 'index,point_id,label_id'");
    }
    Sample s;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        Example e;
        char c1 = 0, c2 = 0;
        if (!(row >> e.index >> c1 >> e.x >> c2 >> e.y) || c1 != ',' || c2 != ',') {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed row '" + line + "'");
        }
        if (e.x < 0 || e.y < 0) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": negative id");
        }
        s.examples.push_back(e);
    }
    return s;
}

}  // namespace multigroup
