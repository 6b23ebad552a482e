#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "dua/csv.hpp"
#include "dua/errors.hpp"
#include "dua/trainer.hpp"

namespace dua {

using nlohmann::json;

namespace {

// Doubles travel through the checkpoint as hexadecimal float literals so that
// save/load round-trips are bit-exact regardless of decimal formatting.
std::string hex_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", x);
    return buf;
}

double parse_hex_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw DataError("checkpoint: cannot parse float literal '" + s + "'");
    }
    return v;
}

json encode_matrix(const Matrix& m) {
    std::string data;
    data.reserve(m.size() * 20);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) data += ' ';
        data += hex_double(m.values()[i]);
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix decode_matrix(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const std::string data = j.at("data").get<std::string>();
    const char* p = data.c_str();
    for (std::size_t i = 0; i < m.size(); ++i) {
        char* end = nullptr;
        m.values()[i] = std::strtod(p, &end);
        if (end == p) throw DataError("checkpoint: matrix data shorter than rows*cols");
        p = end;
    }
    while (*p == ' ') ++p;
    if (*p != '\0') throw DataError("checkpoint: matrix data longer than rows*cols");
    return m;
}

json encode_mlp(const MlpParams& p) {
    return json{{"w1", encode_matrix(p.w1)}, {"b1", encode_matrix(p.b1)},
                {"w2", encode_matrix(p.w2)}, {"b2", encode_matrix(p.b2)},
                {"w3", encode_matrix(p.w3)}, {"b3", encode_matrix(p.b3)}};
}

MlpParams decode_mlp(const json& j) {
    MlpParams p;
    p.w1 = decode_matrix(j.at("w1"));
    p.b1 = decode_matrix(j.at("b1"));
    p.w2 = decode_matrix(j.at("w2"));
    p.b2 = decode_matrix(j.at("b2"));
    p.w3 = decode_matrix(j.at("w3"));
    p.b3 = decode_matrix(j.at("b3"));
    p.validate();
    return p;
}

json encode_config(const TrainConfig& cfg) {
    return json{{"latent_dim", cfg.latent_dim},
                {"epochs", cfg.epochs},
                {"lr", hex_double(cfg.lr)},
                {"latent_lr", hex_double(cfg.latent_lr)},
                {"seed", cfg.seed},
                {"objective", to_string(cfg.objective)},
                {"warm_up_epochs", cfg.warm_up_epochs},
                {"convergence_window", cfg.convergence_window},
                {"convergence_tol", hex_double(cfg.convergence_tol)},
                {"init_scale", hex_double(cfg.init_scale)},
                {"hidden1", cfg.hidden1},
                {"hidden2", cfg.hidden2},
                {"dim_scaled_reg", cfg.dim_scaled_reg},
                {"beta1", hex_double(cfg.beta1)},
                {"beta2", hex_double(cfg.beta2)},
                {"adam_eps", hex_double(cfg.adam_eps)}};
}

TrainConfig decode_config(const json& j) {
    TrainConfig cfg;
    cfg.latent_dim = j.at("latent_dim").get<std::size_t>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.lr = parse_hex_double(j.at("lr").get<std::string>());
    cfg.latent_lr = parse_hex_double(j.at("latent_lr").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.objective = objective_from_string(j.at("objective").get<std::string>());
    cfg.warm_up_epochs = j.at("warm_up_epochs").get<std::size_t>();
    cfg.convergence_window = j.at("convergence_window").get<std::size_t>();
    cfg.convergence_tol = parse_hex_double(j.at("convergence_tol").get<std::string>());
    cfg.init_scale = parse_hex_double(j.at("init_scale").get<std::string>());
    cfg.hidden1 = j.at("hidden1").get<std::size_t>();
    cfg.hidden2 = j.at("hidden2").get<std::size_t>();
    cfg.dim_scaled_reg = j.at("dim_scaled_reg").get<bool>();
    cfg.beta1 = parse_hex_double(j.at("beta1").get<std::string>());
    cfg.beta2 = parse_hex_double(j.at("beta2").get<std::string>());
    cfg.adam_eps = parse_hex_double(j.at("adam_eps").get<std::string>());
    return cfg;
}

json encode_adam(const AdamState& s) {
    json m = json::array(), v = json::array();
    for (const Matrix& mat : s.first_moments()) m.push_back(encode_matrix(mat));
    for (const Matrix& mat : s.second_moments()) v.push_back(encode_matrix(mat));
    return json{{"step", s.step_count()},
                {"lr", hex_double(s.config().lr)},
                {"m", std::move(m)},
                {"v", std::move(v)}};
}

void decode_adam_into(const json& j, AdamState& s) {
    std::vector<Matrix> m, v;
    for (const auto& e : j.at("m")) m.push_back(decode_matrix(e));
    for (const auto& e : j.at("v")) v.push_back(decode_matrix(e));
    s.restore(std::move(m), std::move(v), j.at("step").get<std::int64_t>());
}

}  // namespace

void checkpoint_save(const TrainState& state, const std::filesystem::path& path) {
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["config"] = encode_config(state.config);
    j["latents"] = encode_matrix(state.latents.h);
    j["nets"] = json::array();
    for (const RNet& net : state.nets) {
        j["nets"].push_back(
            {{"mean_head", encode_mlp(net.mean_head)}, {"sigma_head", encode_mlp(net.sigma_head)}});
    }
    j["optimizer"] = json::array();
    for (const AdamState& s : state.optimizer) j["optimizer"].push_back(encode_adam(s));
    j["epochs_completed"] = state.epochs_completed;
    j["history"] = json::array();
    for (const LossBreakdown& l : state.history) {
        json data = json::array(), reg = json::array();
        for (double x : l.per_view_data_term) data.push_back(hex_double(x));
        for (double x : l.per_view_reg_term) reg.push_back(hex_double(x));
        j["history"].push_back(
            {{"total", hex_double(l.total)}, {"data", std::move(data)}, {"reg", std::move(reg)}});
    }
    atomic_write_text(path, j.dump() + "\n");
}

TrainState checkpoint_load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw DataError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (!j.contains("schema_version")) {
            throw DataError("checkpoint " + path.string() + " has no schema_version");
        }
        const int version = j["schema_version"].get<int>();
        if (version != kCheckpointSchemaVersion) {
            throw DataError("checkpoint " + path.string() + " has schema version " +
                            std::to_string(version) + ", expected " +
                            std::to_string(kCheckpointSchemaVersion));
        }

        TrainState state;
        state.config = decode_config(j.at("config"));
        state.latents.h = decode_matrix(j.at("latents"));
        for (const auto& e : j.at("nets")) {
            RNet net;
            net.mean_head = decode_mlp(e.at("mean_head"));
            net.sigma_head = decode_mlp(e.at("sigma_head"));
            if (net.sigma_head.out_width() != 1) {
                throw DataError("checkpoint: sigma head output width must be 1");
            }
            state.nets.push_back(std::move(net));
        }

        AdamConfig latent_adam{state.config.latent_lr > 0.0 ? state.config.latent_lr
                                                            : state.config.lr,
                               state.config.beta1, state.config.beta2, state.config.adam_eps};
        AdamConfig net_adam{state.config.lr, state.config.beta1, state.config.beta2,
                            state.config.adam_eps};
        state.optimizer.emplace_back(std::vector<const Matrix*>{&state.latents.h}, latent_adam);
        for (const RNet& net : state.nets) {
            state.optimizer.emplace_back(net.mean_head.params(), net_adam);
            state.optimizer.emplace_back(net.sigma_head.params(), net_adam);
        }
        const auto& opt = j.at("optimizer");
        if (opt.size() != state.optimizer.size()) {
            throw DataError("checkpoint: optimizer group count mismatch");
        }
        for (std::size_t i = 0; i < state.optimizer.size(); ++i) {
            decode_adam_into(opt[i], state.optimizer[i]);
        }

        state.epochs_completed = j.at("epochs_completed").get<std::size_t>();
        for (const auto& e : j.at("history")) {
            LossBreakdown l;
            l.total = parse_hex_double(e.at("total").get<std::string>());
            for (const auto& x : e.at("data"))
                l.per_view_data_term.push_back(parse_hex_double(x.get<std::string>()));
            for (const auto& x : e.at("reg"))
                l.per_view_reg_term.push_back(parse_hex_double(x.get<std::string>()));
            state.history.push_back(std::move(l));
        }
        return state;
    } catch (const json::exception& e) {
        throw DataError("invalid checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace dua
