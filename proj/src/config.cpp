#include "scout/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "scout/common.hpp"

namespace scout {

using nlohmann::json;

RunConfig default_config(EnvKind env) {
    RunConfig c;
    c.env = env;
    switch (env) {
        case EnvKind::OpenLabyrinth:
            break;  // struct defaults are the open-labyrinth values
        case EnvKind::FourRoom:
            c.n_max = 2000;
            c.n_freq = 3;
            c.plan.epsilon = 0.2;
            break;
        case EnvKind::KeyMaze:
            c.n_max = 4000;
            c.n_freq = 3;
            c.n_iters = 50000;
            c.lr = 0.000025;
            c.n_x = 3;
            c.plan.epsilon = 0.1;
            break;
    }
    return c;
}

namespace {

int read_int(const json& v, const std::string& key, int lo) {
    check(v.is_number_integer(), "config: " + key + " must be an integer");
    long long n = v.get<long long>();
    check(n >= lo && n <= std::numeric_limits<int>::max(),
          "config: " + key + " must be an integer >= " + std::to_string(lo));
    return static_cast<int>(n);
}

double read_double(const json& v, const std::string& key, double lo, double hi,
                   bool open_above) {
    check(v.is_number(), "config: " + key + " must be a number");
    double d = v.get<double>();
    bool in_range = std::isfinite(d) && d >= lo && (open_above ? d < hi : d <= hi);
    if (!in_range) {
        std::ostringstream os;
        os << "config: " << key << " must lie in [" << lo << ", " << hi
           << (open_above ? ")" : "]");
        fail(os.str());
    }
    return d;
}

double read_positive(const json& v, const std::string& key) {
    check(v.is_number(), "config: " + key + " must be a number");
    double d = v.get<double>();
    check(std::isfinite(d) && d > 0.0, "config: " + key + " must be positive");
    return d;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& env_override) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        fail(std::string("config: invalid JSON: ") + e.what());
    }
    check(j.is_object(), "config: top level must be a JSON object");

    // the environment decides the defaults, so resolve it first
    std::string env_name = env_override;
    if (j.contains("env")) {
        const json& v = j["env"];
        check(v.is_string(), "config: env must be a string");
        std::string file_env = v.get<std::string>();
        env_kind_from_name(file_env);  // reject typos even when overridden
        if (env_name.empty()) env_name = file_env;
    }
    RunConfig c = env_name.empty() ? default_config(EnvKind::OpenLabyrinth)
                                   : default_config(env_kind_from_name(env_name));

    for (const auto& [key, v] : j.items()) {
        if (key == "env") {
            continue;
        } else if (key == "policy") {
            check(v.is_string(), "config: policy must be a string");
            std::string p = v.get<std::string>();
            check(p == "novelty" || p == "random" || p == "count" || p == "hash" ||
                      p == "pred_error",
                  "config: policy must be one of novelty, random, count, hash, pred_error");
            c.policy = p;
        } else if (key == "seed") {
            check(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
                  "config: seed must be a nonnegative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "n_init") {
            c.n_init = read_int(v, key, 1);
        } else if (key == "n_max") {
            c.n_max = read_int(v, key, 1);
        } else if (key == "n_freq") {
            c.n_freq = read_int(v, key, 1);
        } else if (key == "n_iters") {
            c.n_iters = read_int(v, key, 1);
        } else if (key == "lr") {
            c.lr = read_positive(v, key);
        } else if (key == "gamma") {
            c.gamma = read_double(v, key, 0.0, 1.0, true);
        } else if (key == "buffer_capacity") {
            c.buffer_capacity = read_int(v, key, 1);
        } else if (key == "batch_size") {
            c.batch_size = read_int(v, key, 1);
        } else if (key == "omega") {
            c.omega = read_positive(v, key);
        } else if (key == "delta") {
            c.delta = read_positive(v, key);
        } else if (key == "k") {
            c.k = read_int(v, key, 1);
        } else if (key == "c_d1") {
            c.c_d1 = read_positive(v, key);
        } else if (key == "n_x") {
            c.n_x = read_int(v, key, 1);
        } else if (key == "depth") {
            c.plan.depth = read_int(v, key, 0);
        } else if (key == "b") {
            int b = read_int(v, key, 1);
            check(b <= 4, "config: b must lie in [1, 4]");
            c.plan.b = b;
        } else if (key == "epsilon") {
            c.plan.epsilon = read_double(v, key, 0.0, 1.0, false);
        } else {
            fail("config: unknown key \"" + key + "\"");
        }
    }
    return c;
}

RunConfig parse_config_file(const std::string& path, const std::string& env_override) {
    std::ifstream in(path);
    check(in.good(), "config: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), env_override);
}

std::string serialize_config(const RunConfig& c) {
    json j;
    j["env"] = env_kind_name(c.env);
    j["policy"] = c.policy;
    j["seed"] = c.seed;
    j["n_init"] = c.n_init;
    j["n_max"] = c.n_max;
    j["n_freq"] = c.n_freq;
    j["n_iters"] = c.n_iters;
    j["lr"] = c.lr;
    j["gamma"] = c.gamma;
    j["buffer_capacity"] = c.buffer_capacity;
    j["batch_size"] = c.batch_size;
    j["omega"] = c.omega;
    j["delta"] = c.delta;
    j["k"] = c.k;
    j["c_d1"] = c.c_d1;
    j["n_x"] = c.n_x;
    j["depth"] = c.plan.depth;
    j["b"] = c.plan.b;
    j["epsilon"] = c.plan.epsilon;
    return j.dump(2) + "\n";
}

}  // namespace scout
