#include "lmsexact/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lmsexact/errors.hpp"

namespace lmsexact {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kModelFormat = "lms-deficient-model";
constexpr int kModelVersion = 1;

json sparse_to_json(const SparseMatrix& a) {
    json triplets = json::array();
    for (const Triplet& t : a.entries)
        triplets.push_back(json::array({t.row, t.col, t.value}));
    return json{{"rows", a.rows}, {"cols", a.cols}, {"triplets", std::move(triplets)}};
}

SparseMatrix sparse_from_json(const json& j) {
    std::vector<Triplet> raw;
    for (const auto& t : j.at("triplets"))
        raw.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
    SparseMatrix a = SparseMatrix::from_triplets(j.at("rows").get<int>(),
                                                j.at("cols").get<int>(), std::move(raw));
    a.check_invariants();
    return a;
}

std::string dist_label(const MomentSpec& m) {
    if (m.tag() == "gaussian-unit") return "gaussian";
    if (m.tag() == "laplacian-unit") return "laplacian";
    return "custom";
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json config_to_json(const SystemConfig& cfg) {
    json j;
    j["n"] = cfg.n_adaptive;
    j["m"] = cfg.ma_order;
    j["p"] = cfg.p_excess;
    j["b"] = cfg.b_coeffs;
    j["w_star"] = cfg.w_star;
    j["beta"] = cfg.beta;
    j["noise_variance"] = cfg.noise_variance;
    j["distribution"] = dist_label(cfg.moments);
    if (dist_label(cfg.moments) == "custom") {
        json table;
        for (const auto& [order, value] : cfg.moments.table())
            table[std::to_string(order)] = value;
        j["even_moments"] = std::move(table);
    } else {
        j["max_moment_order"] = cfg.moments.max_order();
    }
    return j;
}

SystemConfig config_from_json(const json& j) {
    SystemConfig cfg;
    try {
        cfg.n_adaptive = j.at("n").get<int>();
        cfg.ma_order = j.at("m").get<int>();
        cfg.p_excess = j.at("p").get<int>();
        cfg.b_coeffs = j.at("b").get<std::vector<double>>();
        cfg.w_star = j.at("w_star").get<std::vector<double>>();
        cfg.beta = j.value("beta", 0.0);
        cfg.noise_variance = j.value("noise_variance", 0.0);

        std::string dist = j.value("distribution", std::string("gaussian"));
        if (dist == "custom") {
            if (!j.contains("even_moments"))
                throw ConfigError("custom distribution requires an even_moments table");
            std::map<int, double> table;
            for (const auto& [key, value] : j.at("even_moments").items()) {
                int order = 0;
                auto res = std::from_chars(key.data(), key.data() + key.size(), order);
                if (res.ec != std::errc{} || res.ptr != key.data() + key.size())
                    throw ConfigError("even_moments key is not an integer: " + key);
                table[order] = value.get<double>();
            }
            cfg.moments = MomentSpec::custom(std::move(table));
        } else {
            std::string tag;
            if (dist == "gaussian" || dist == "gaussian-unit") tag = "gaussian-unit";
            else if (dist == "laplacian" || dist == "laplacian-unit") tag = "laplacian-unit";
            else throw ConfigError("unknown distribution: " + dist);
            int fallback = required_moment_order(cfg.n_adaptive, cfg.ma_order,
                                                 cfg.p_excess, 2);
            cfg.moments = moments_for(tag, j.value("max_moment_order", fallback));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return config_from_json(j);
}

json model_to_json(const StateSpaceModel& m) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["kind"] = m.kind;
    j["order"] = m.order;
    j["config"] = config_to_json(m.cfg);
    j["dim"] = m.dim();

    json vars = json::array();
    for (const StateVariable& v : m.variables) {
        json factors = json::array();
        for (const Factor& f : v.mono.factors)
            factors.push_back(json::array({(int)f.kind, (int)f.idx, (int)f.pow}));
        vars.push_back(json{{"name", v.name()}, {"factors", std::move(factors)}});
    }
    j["variables"] = std::move(vars);

    for (int d = 0; d < 3; ++d)
        j["a" + std::to_string(d)] = sparse_to_json(m.a[d]);
    for (int d = 0; d < 3; ++d) {
        std::vector<double> f = m.forcing[d];
        f.resize((std::size_t)m.dim(), 0.0);
        j["f" + std::to_string(d)] = std::move(f);
    }

    json outs = json::array();
    for (const OutputFunctional& o : m.outputs) {
        json coeffs = json::array();
        for (const auto& [idx, value] : o.coeffs)
            coeffs.push_back(json::array({idx, value}));
        outs.push_back(json{{"name", o.name},
                            {"constant", o.constant},
                            {"coeffs", std::move(coeffs)}});
    }
    j["outputs"] = std::move(outs);

    // derive_seconds is deliberately not stored: the file describes the
    // model, not the run that produced it, and must be byte-reproducible
    j["stats"] = json{{"n_vars", m.stats.n_vars}, {"nnz", m.stats.nnz}};
    return j;
}

StateSpaceModel model_from_json(const json& j) {
    StateSpaceModel m;
    try {
        if (j.value("format", std::string()) != kModelFormat)
            throw ConfigError("not a model file (missing format marker)");
        if (j.at("version").get<int>() != kModelVersion)
            throw ConfigError("unsupported model file version");
        m.kind = j.at("kind").get<std::string>();
        m.order = j.at("order").get<int>();
        m.cfg = config_from_json(j.at("config"));

        for (const auto& jv : j.at("variables")) {
            StateVariable v;
            v.mono.coeff = 1.0;
            v.mono.beta_deg = 0;
            for (const auto& jf : jv.at("factors"))
                v.mono.factors.push_back({(Gen)jf.at(0).get<int>(),
                                          (std::uint16_t)jf.at(1).get<int>(),
                                          (std::uint16_t)jf.at(2).get<int>()});
            m.variables.push_back(std::move(v));
        }

        int dim = j.at("dim").get<int>();
        if (dim != m.dim())
            throw ConfigError("model file dim does not match its variable list");
        for (int d = 0; d < 3; ++d) {
            m.a[d] = sparse_from_json(j.at("a" + std::to_string(d)));
            if (m.a[d].rows != dim || m.a[d].cols != dim)
                throw ConfigError("model file matrix shape does not match dim");
            m.forcing[d] = j.at("f" + std::to_string(d)).get<std::vector<double>>();
            if ((int)m.forcing[d].size() != dim)
                throw ConfigError("model file forcing length does not match dim");
        }

        for (const auto& jo : j.at("outputs")) {
            OutputFunctional o;
            o.name = jo.at("name").get<std::string>();
            o.constant = jo.at("constant").get<double>();
            for (const auto& jc : jo.at("coeffs"))
                o.coeffs.emplace_back(jc.at(0).get<int>(), jc.at(1).get<double>());
            m.outputs.push_back(std::move(o));
        }

        const auto& js = j.at("stats");
        m.stats.n_vars = js.at("n_vars").get<long long>();
        m.stats.nnz = js.at("nnz").get<long long>();
        m.stats.derive_seconds = 0.0;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad model JSON: ") + e.what());
    }
    return m;
}

void save_model(const StateSpaceModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << model_to_json(m).dump(1) << '\n';
    if (!out) throw ConfigError("failed writing model file: " + path);
}

StateSpaceModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace lmsexact
