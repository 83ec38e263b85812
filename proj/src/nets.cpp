#include "scout/nets.hpp"

#include <fstream>
#include <json.hpp>

#include "scout/common.hpp"

namespace scout {

using nlohmann::json;

Mlp make_encoder(int obs_dim, int n_x) {
    return Mlp(obs_dim, {{200, Act::Tanh},
                         {100, Act::Tanh},
                         {50, Act::Tanh},
                         {10, Act::Tanh},
                         {n_x, Act::Linear}});
}

Mlp make_transition_net(int n_x, int num_actions) {
    const double drop = 0.1;
    return Mlp(n_x + num_actions, {{10, Act::Tanh, drop},
                                   {30, Act::Tanh, drop},
                                   {30, Act::Tanh, drop},
                                   {10, Act::Tanh, drop},
                                   {n_x, Act::Linear}});
}

static Mlp make_scalar_head(int n_x, int num_actions) {
    return Mlp(n_x + num_actions,
               {{10, Act::Tanh}, {50, Act::Tanh}, {20, Act::Tanh}, {1, Act::Linear}});
}

Mlp make_reward_head(int n_x, int num_actions) { return make_scalar_head(n_x, num_actions); }
Mlp make_discount_head(int n_x, int num_actions) { return make_scalar_head(n_x, num_actions); }

Mlp make_q_net(int n_x, int num_actions) {
    return Mlp(n_x, {{20, Act::Relu}, {50, Act::Relu}, {20, Act::Relu}, {num_actions, Act::Linear}});
}

Mlp make_obs_q_net(int obs_dim, int num_actions) {
    return Mlp(obs_dim, {{500, Act::Tanh},
                         {200, Act::Tanh},
                         {50, Act::Tanh},
                         {10, Act::Tanh},
                         {num_actions, Act::Linear}});
}

Tensor one_hot(int a, int n) {
    check(a >= 0 && a < n, "one_hot: action out of range");
    Tensor t(1, n);
    t.data[static_cast<size_t>(a)] = 1.0;
    return t;
}

Tensor concat_action(const Tensor& x, const std::vector<int>& actions, int num_actions) {
    check(static_cast<int>(actions.size()) == x.rows, "concat_action: one action per row");
    Tensor out(x.rows, x.cols + num_actions);
    for (int i = 0; i < x.rows; ++i) {
        check(actions[i] >= 0 && actions[i] < num_actions, "concat_action: action out of range");
        for (int j = 0; j < x.cols; ++j) out.at(i, j) = x.at(i, j);
        out.at(i, x.cols + actions[i]) = 1.0;
    }
    return out;
}

Tensor residual_transition(const Mlp& net, const Tensor& x, const Tensor& a_onehot) {
    check(x.rows == a_onehot.rows, "residual_transition: row mismatch");
    Tensor in(x.rows, x.cols + a_onehot.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) in.at(i, j) = x.at(i, j);
        for (int j = 0; j < a_onehot.cols; ++j) in.at(i, x.cols + j) = a_onehot.at(i, j);
    }
    Tensor d = net.forward(in);
    check(d.same_shape(x), "residual_transition: net output dim must match x");
    for (size_t k = 0; k < d.size(); ++k) d.data[k] += x.data[k];
    return d;
}

double clip_reward(double r) { return r < -1.0 ? -1.0 : (r > 1.0 ? 1.0 : r); }
double clip_discount(double g) { return g < 0.0 ? 0.0 : (g > 0.99 ? 0.99 : g); }

int argmax_lowest(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

ModelNets::ModelNets(int obs_dim, int n_x, int num_actions)
    : encoder(make_encoder(obs_dim, n_x)),
      transition(make_transition_net(n_x, num_actions)),
      reward(make_reward_head(n_x, num_actions)),
      discount(make_discount_head(n_x, num_actions)),
      q(make_q_net(n_x, num_actions)),
      target_encoder(make_encoder(obs_dim, n_x)),
      target_q(make_q_net(n_x, num_actions)) {}

void ModelNets::init(std::uint64_t seed) {
    Rng r0 = Rng::stream(seed, 0);
    encoder.init(r0);
    Rng r1 = Rng::stream(seed, 1);
    transition.init(r1);
    Rng r2 = Rng::stream(seed, 2);
    reward.init(r2);
    Rng r3 = Rng::stream(seed, 3);
    discount.init(r3);
    Rng r4 = Rng::stream(seed, 4);
    q.init(r4);
    sync_targets_now();
    steps_since_sync = 0;
}

void ModelNets::attach(RmsProp& opt) {
    encoder.attach(opt);
    transition.attach(opt);
    reward.attach(opt);
    discount.attach(opt);
    q.attach(opt);
}

bool ModelNets::after_gradient_step() {
    ++steps_since_sync;
    if (steps_since_sync >= freeze_interval) {
        sync_targets_now();
        steps_since_sync = 0;
        return true;
    }
    return false;
}

void ModelNets::sync_targets_now() {
    target_encoder.copy_params_from(encoder);
    target_q.copy_params_from(q);
}

Tensor ModelNets::predict_transition(const Tensor& x, int action) const {
    Tensor a(x.rows, num_actions());
    for (int i = 0; i < x.rows; ++i) a.at(i, action) = 1.0;
    return residual_transition(transition, x, a);
}

double ModelNets::predict_reward(const Tensor& x, int action) const {
    check(x.rows == 1, "predict_reward: one row at a time");
    Tensor in = concat_action(x, {action}, num_actions());
    return reward.forward(in).data[0];
}

double ModelNets::predict_discount(const Tensor& x, int action) const {
    check(x.rows == 1, "predict_discount: one row at a time");
    Tensor in = concat_action(x, {action}, num_actions());
    return discount.forward(in).data[0];
}

namespace {

json mlp_to_json(const Mlp& net) {
    json j;
    j["in"] = net.in_dim();
    json layers = json::array();
    auto specs = net.layer_specs();
    auto params = net.param_tensors();
    for (size_t i = 0; i < specs.size(); ++i) {
        json l;
        l["out"] = specs[i].out;
        l["act"] = specs[i].act == Act::Tanh ? "tanh" : specs[i].act == Act::Relu ? "relu" : "linear";
        l["dropout"] = specs[i].dropout;
        l["W"] = params[2 * i]->data;
        l["b"] = params[2 * i + 1]->data;
        layers.push_back(std::move(l));
    }
    j["layers"] = std::move(layers);
    return j;
}

void mlp_from_json(const json& j, Mlp& net) {
    check(j.at("in").get<int>() == net.in_dim(), "checkpoint: input dim mismatch");
    auto specs = net.layer_specs();
    const json& layers = j.at("layers");
    check(layers.size() == specs.size(), "checkpoint: layer count mismatch");
    auto params = net.param_tensors();
    for (size_t i = 0; i < specs.size(); ++i) {
        const json& l = layers[i];
        check(l.at("out").get<int>() == specs[i].out, "checkpoint: layer width mismatch");
        auto W = l.at("W").get<std::vector<double>>();
        auto b = l.at("b").get<std::vector<double>>();
        check(W.size() == params[2 * i]->size(), "checkpoint: weight size mismatch");
        check(b.size() == params[2 * i + 1]->size(), "checkpoint: bias size mismatch");
        params[2 * i]->data.assign(W.begin(), W.end());
        params[2 * i + 1]->data.assign(b.begin(), b.end());
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelNets& nets, const RmsProp* opt) {
    json j;
    j["format"] = 1;
    j["nets"]["encoder"] = mlp_to_json(nets.encoder);
    j["nets"]["transition"] = mlp_to_json(nets.transition);
    j["nets"]["reward"] = mlp_to_json(nets.reward);
    j["nets"]["discount"] = mlp_to_json(nets.discount);
    j["nets"]["q"] = mlp_to_json(nets.q);
    j["nets"]["target_encoder"] = mlp_to_json(nets.target_encoder);
    j["nets"]["target_q"] = mlp_to_json(nets.target_q);
    j["steps_since_sync"] = nets.steps_since_sync;
    if (opt != nullptr) {
        json st = json::array();
        for (const auto& t : opt->state()) st.push_back(t.data);
        j["opt"] = std::move(st);
    }
    std::ofstream out(path);
    check(out.good(), "checkpoint: cannot open " + path + " for writing");
    out << j.dump();
    check(out.good(), "checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, ModelNets& nets, RmsProp* opt) {
    std::ifstream in(path);
    check(in.good(), "checkpoint: cannot open " + path);
    json j = json::parse(in);
    check(j.at("format").get<int>() == 1, "checkpoint: unsupported format");
    mlp_from_json(j.at("nets").at("encoder"), nets.encoder);
    mlp_from_json(j.at("nets").at("transition"), nets.transition);
    mlp_from_json(j.at("nets").at("reward"), nets.reward);
    mlp_from_json(j.at("nets").at("discount"), nets.discount);
    mlp_from_json(j.at("nets").at("q"), nets.q);
    mlp_from_json(j.at("nets").at("target_encoder"), nets.target_encoder);
    mlp_from_json(j.at("nets").at("target_q"), nets.target_q);
    nets.steps_since_sync = j.at("steps_since_sync").get<int>();
    if (opt != nullptr) {
        check(j.contains("opt"), "checkpoint: no optimizer state stored");
        auto& st = opt->state();
        const json& js = j.at("opt");
        check(js.size() == st.size(), "checkpoint: optimizer slot count mismatch");
        for (size_t i = 0; i < st.size(); ++i) {
            auto v = js[i].get<std::vector<double>>();
            check(v.size() == st[i].size(), "checkpoint: optimizer state size mismatch");
            st[i].data.assign(v.begin(), v.end());
        }
    }
}

}  // namespace scout
