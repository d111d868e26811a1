// SPDX-License-Identifier: Apache-2.0
#include "moop/instance.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moop/error.hpp"
#include "moop/rng.hpp"

namespace moop {

using nlohmann::json;

Instance generate_instance(int n_cities, int k_profits, double t_max, std::uint64_t seed, std::string name) {
    if (n_cities < 2) throw ValidationError("generate_instance: n_cities must be >= 2 (got " + std::to_string(n_cities) + ")");
    if (k_profits < 0) throw ValidationError("generate_instance: k_profits must be >= 0");
    if (!(t_max >= 0.0)) throw ValidationError("generate_instance: t_max must be >= 0");

    Instance inst;
    inst.name = name.empty() ? "op-" + std::to_string(n_cities) + "-k" + std::to_string(k_profits) : std::move(name);
    inst.n_cities = n_cities;
    inst.k_profits = k_profits;
    inst.t_max = t_max;
    inst.seed = seed;

    Rng rng(seed);
    inst.coords.resize(static_cast<std::size_t>(n_cities));
    for (auto& c : inst.coords) {
        c[0] = rng.uniform();
        c[1] = rng.uniform();
    }
    inst.profits.resize(static_cast<std::size_t>(n_cities) * k_profits);
    for (auto& p : inst.profits) p = rng.uniform();
    return inst;
}

void validate(const Instance& inst) {
    auto fail = [&](const std::string& msg) { throw ValidationError("instance '" + inst.name + "': " + msg); };
    if (inst.n_cities < 2) fail("n_cities must be >= 2");
    if (inst.k_profits < 0) fail("k_profits must be >= 0");
    if (inst.depot != 0) fail("depot must be city 0");
    if (!(inst.t_max >= 0.0)) fail("t_max must be a nonnegative number");
    if (inst.coords.size() != static_cast<std::size_t>(inst.n_cities)) fail("coords has wrong length");
    if (inst.profits.size() != static_cast<std::size_t>(inst.n_cities) * inst.k_profits) fail("profits has wrong shape");
    for (const auto& c : inst.coords)
        if (!(c[0] >= 0.0 && c[0] <= 1.0 && c[1] >= 0.0 && c[1] <= 1.0)) fail("coordinate outside the unit square");
    for (double p : inst.profits)
        if (!(p >= 0.0 && p <= 1.0)) fail("profit outside [0,1]");
}

DistanceMatrix::DistanceMatrix(std::span<const Point2> coords)
    : n_(static_cast<int>(coords.size())), d_(coords.size() * coords.size(), 0.0) {
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            const double d = euclidean(coords[i], coords[j]);
            d_[static_cast<std::size_t>(i) * n_ + j] = d;
            d_[static_cast<std::size_t>(j) * n_ + i] = d;
        }
}

DistanceMatrix distance_matrix(const Instance& inst) { return DistanceMatrix(inst.coords); }

std::vector<Point2> random_coords(int n, Rng& rng) {
    std::vector<Point2> out(static_cast<std::size_t>(n));
    for (auto& c : out) {
        c[0] = rng.uniform();
        c[1] = rng.uniform();
    }
    return out;
}

std::string instance_to_json(const Instance& inst) {
    json doc;
    doc["name"] = inst.name;
    doc["n_cities"] = inst.n_cities;
    doc["k_profits"] = inst.k_profits;
    doc["t_max"] = inst.t_max;
    doc["depot"] = inst.depot;
    doc["seed"] = inst.seed;
    json coords = json::array();
    for (const auto& c : inst.coords) coords.push_back({c[0], c[1]});
    doc["coords"] = std::move(coords);
    json profits = json::array();
    for (int i = 0; i < inst.n_cities; ++i) {
        auto row = inst.profit_row(i);
        profits.push_back(json(std::vector<double>(row.begin(), row.end())));
    }
    doc["profits"] = std::move(profits);
    return doc.dump(1) + "\n";
}

namespace {

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(key, std::string("instance: missing field '") + key + "'");
    return *it;
}

template <class T>
T field_as(const json& doc, const char* key) {
    const json& v = require(doc, key);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ParseError(key, std::string("instance: field '") + key + "' has the wrong type");
    }
}

} // namespace

Instance instance_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("instance: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("", "instance: top level must be an object");

    Instance inst;
    inst.name = field_as<std::string>(doc, "name");
    inst.n_cities = field_as<int>(doc, "n_cities");
    inst.k_profits = field_as<int>(doc, "k_profits");
    inst.t_max = field_as<double>(doc, "t_max");
    inst.depot = field_as<int>(doc, "depot");
    inst.seed = field_as<std::uint64_t>(doc, "seed");

    const json& coords = require(doc, "coords");
    if (!coords.is_array() || coords.size() != static_cast<std::size_t>(inst.n_cities))
        throw ParseError("coords", "instance: field 'coords' must be an array of n_cities [x, y] pairs");
    for (const auto& c : coords) {
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
            throw ParseError("coords", "instance: field 'coords' entries must be [x, y] number pairs");
        inst.coords.push_back({c[0].get<double>(), c[1].get<double>()});
    }

    const json& profits = require(doc, "profits");
    if (!profits.is_array() || profits.size() != static_cast<std::size_t>(inst.n_cities))
        throw ParseError("profits", "instance: field 'profits' must have n_cities rows");
    for (const auto& row : profits) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(inst.k_profits))
            throw ParseError("profits", "instance: each 'profits' row must have k_profits numbers");
        for (const auto& p : row) {
            if (!p.is_number()) throw ParseError("profits", "instance: field 'profits' holds a non-number");
            inst.profits.push_back(p.get<double>());
        }
    }

    try {
        validate(inst);
    } catch (const ValidationError& e) {
        throw ParseError("", e.what());
    }
    return inst;
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write instance file " + path.string());
    out << instance_to_json(inst);
    if (!out) throw std::runtime_error("failed writing instance file " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read instance file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return instance_from_json(ss.str());
}

double grid_t_max(int n_cities) noexcept {
    switch (n_cities) {
    case 20: return 2.0;
    case 50: return 3.0;
    case 100: return 4.0;
    case 200: return 6.0;
    case 500: return 10.0;
    case 1000: return 15.0;
    default: return -1.0;
    }
}

} // namespace moop
