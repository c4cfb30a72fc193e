#include "trail/config.hpp"

#include <sstream>
#include <stdexcept>

#include "trail/io.hpp"

namespace trail {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int r = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (...) {
        throw std::invalid_argument("config key " + key + ": not an integer: " + v);
    }
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (...) {
        throw std::invalid_argument("config key " + key + ": not a number: " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key " + key + ": not a boolean: " + v);
}

std::vector<std::uint64_t> to_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(v);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = strip(field);
        if (field.empty()) continue;
        try {
            out.push_back(std::stoull(field));
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": bad seed: " + field);
        }
    }
    if (out.empty()) throw std::invalid_argument("config key " + key + ": empty seed list");
    return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = strip(field);
        if (!field.empty()) out.push_back(to_int(key, field));
    }
    if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_seeds(const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value, got: " + line);
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key " + key);
    }
    return kv;
}

TrainConfig train_config_from(const std::map<std::string, std::string>& kv) {
    TrainConfig cfg;
    for (const auto& [key, v] : kv) {
        if (key == "env.name") cfg.env.name = v;
        else if (key == "env.rooms_x") cfg.env.rooms_x = to_int(key, v);
        else if (key == "env.rooms_y") cfg.env.rooms_y = to_int(key, v);
        else if (key == "env.room_size") cfg.env.room_size = to_int(key, v);
        else if (key == "env.noise_sigma") cfg.env.noise_sigma = to_real(key, v);
        else if (key == "env.door_width") cfg.env.door_width = to_real(key, v);
        else if (key == "env.horizon") cfg.env.horizon = to_int(key, v);
        else if (key == "env.seed") cfg.env.seed = std::stoull(v);
        else if (key == "train.seeds") cfg.seeds = to_seed_list(key, v);
        else if (key == "train.episodes") cfg.episodes = to_int(key, v);
        else if (key == "train.updates_per_step") cfg.updates_per_env_step = to_int(key, v);
        else if (key == "train.batch_size") cfg.batch_size = to_int(key, v);
        else if (key == "train.lr") cfg.lr = to_real(key, v);
        else if (key == "train.buffer_capacity") cfg.buffer_capacity = to_int(key, v);
        else if (key == "train.post_process") cfg.post_process = to_bool(key, v);
        else if (key == "train.collector") {
            if (v == "gcsl") cfg.collector = Collector::Gcsl;
            else if (v == "trail") cfg.collector = Collector::Trail;
            else throw std::invalid_argument("config key " + key + ": expected gcsl|trail, got " + v);
        }
        else if (key == "train.clip_norm") cfg.clip_norm = to_real(key, v);
        else if (key == "trail.k") cfg.trail.n_modes = to_int(key, v);
        else if (key == "trail.alpha_edge") cfg.trail.alpha_edge = to_real(key, v);
        else if (key == "trail.alpha_sc") cfg.trail.alpha_sc = to_real(key, v);
        else if (key == "net.policy_hidden") cfg.policy_hidden = to_int_list(key, v);
        else if (key == "net.encoder_hidden") cfg.encoder_hidden = to_int_list(key, v);
        else if (key == "eval.every") cfg.eval_every = to_int(key, v);
        else if (key == "eval.n_queries") cfg.n_eval_queries = to_int(key, v);
        else if (key == "eval.seed") cfg.eval_seed = std::stoull(v);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

std::string train_config_to_text(const TrainConfig& cfg) {
    std::string s;
    s += "env.name = " + cfg.env.name + "\n";
    s += "env.rooms_x = " + std::to_string(cfg.env.rooms_x) + "\n";
    s += "env.rooms_y = " + std::to_string(cfg.env.rooms_y) + "\n";
    s += "env.room_size = " + std::to_string(cfg.env.room_size) + "\n";
    s += "env.noise_sigma = " + fmt_real(cfg.env.noise_sigma) + "\n";
    s += "env.door_width = " + fmt_real(cfg.env.door_width) + "\n";
    s += "env.horizon = " + std::to_string(cfg.env.horizon) + "\n";
    s += "env.seed = " + std::to_string(cfg.env.seed) + "\n";
    s += "train.seeds = " + join_seeds(cfg.seeds) + "\n";
    s += "train.episodes = " + std::to_string(cfg.episodes) + "\n";
    s += "train.updates_per_step = " + std::to_string(cfg.updates_per_env_step) + "\n";
    s += "train.batch_size = " + std::to_string(cfg.batch_size) + "\n";
    s += "train.lr = " + fmt_real(cfg.lr) + "\n";
    s += "train.buffer_capacity = " + std::to_string(cfg.buffer_capacity) + "\n";
    s += "train.post_process = " + std::string(cfg.post_process ? "true" : "false") + "\n";
    s += "train.collector = " + std::string(cfg.collector == Collector::Gcsl ? "gcsl" : "trail") +
         "\n";
    if (cfg.clip_norm) s += "train.clip_norm = " + fmt_real(*cfg.clip_norm) + "\n";
    s += "trail.k = " + std::to_string(cfg.trail.n_modes) + "\n";
    s += "trail.alpha_edge = " + fmt_real(cfg.trail.alpha_edge) + "\n";
    s += "trail.alpha_sc = " + fmt_real(cfg.trail.alpha_sc) + "\n";
    s += "net.policy_hidden = " + join_ints(cfg.policy_hidden) + "\n";
    s += "net.encoder_hidden = " + join_ints(cfg.encoder_hidden) + "\n";
    s += "eval.every = " + std::to_string(cfg.eval_every) + "\n";
    s += "eval.n_queries = " + std::to_string(cfg.n_eval_queries) + "\n";
    s += "eval.seed = " + std::to_string(cfg.eval_seed) + "\n";
    return s;
}

} // namespace trail
