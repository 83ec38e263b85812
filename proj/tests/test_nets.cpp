#include <doctest.h>

#include <cstdio>

#include "scout/nets.hpp"
#include "scout/tape.hpp"

using namespace scout;

TEST_SUITE("nets") {

TEST_CASE("architectures have the contracted shapes") {
    ModelNets nets(2 * 21 * 21, 2, 4);
    nets.init(7);
    CHECK(nets.n_x() == 2);
    CHECK(nets.num_actions() == 4);

    Tensor obs(1, 2 * 21 * 21, 0.0);
    obs.data[0] = 1.0;
    Tensor x = nets.encode(obs);
    CHECK(x.rows == 1);
    CHECK(x.cols == 2);

    Tensor qv = nets.q_values(x);
    CHECK(qv.cols == 4);

    ModelNets maze(5 * 15 * 15, 3, 4);
    maze.init(7);
    Tensor mobs(1, 5 * 15 * 15, 0.0);
    CHECK(maze.encode(mobs).cols == 3);

    Mlp baseline = make_obs_q_net(2 * 21 * 21, 4);
    CHECK(baseline.out_dim() == 4);
    CHECK(baseline.num_layers() == 5);
}

TEST_CASE("encoding is deterministic") {
    ModelNets nets(8, 2, 4);
    nets.init(3);
    Tensor obs(1, 8, 0.0);
    obs.data[2] = 1.0;
    CHECK(nets.encode(obs).data == nets.encode(obs).data);
}

TEST_CASE("zero transition net is the identity on x") {
    ModelNets nets(8, 2, 4);
    nets.init(11);
    for (Tensor* p : nets.transition.param_tensors()) p->zero();
    Tensor x(1, 2);
    x.data = {0.37, -1.2};
    Tensor nx = nets.predict_transition(x, 2);
    CHECK(nx.data == x.data);
}

TEST_CASE("residual transition matches hand arithmetic on a 2d toy") {
    // single linear layer: rows of W are [x0, x1, a0, a1]
    Mlp toy(4, {{2, Act::Linear}});
    auto params = toy.param_tensors();
    params[0]->data = {1.0, 0.0,   // x0
                       0.0, 1.0,   // x1
                       0.5, -0.5,  // a0
                       1.0, 1.0};  // a1
    params[1]->data = {0.1, 0.2};
    Tensor x(1, 2);
    x.data = {0.3, -0.7};
    Tensor out = residual_transition(toy, x, one_hot(1, 2));
    CHECK(out.at(0, 0) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(out.at(0, 1) == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("scalar heads fit a constant target") {
    // overfit one (x, a) pair to 0.8 and read the prediction back
    ModelNets nets(8, 2, 4);
    nets.init(5);
    RmsProp opt(0.00025);
    nets.discount.attach(opt);

    Tensor x(1, 2);
    x.data = {0.4, -0.3};
    Tensor in = concat_action(x, {1}, 4);
    for (int it = 0; it < 4000; ++it) {
        Tape t;
        auto bound = nets.discount.bind(t);
        int pred = nets.discount.forward_tape(t, bound, t.input(in));
        int err = t.add_scalar(pred, -0.8);
        t.backward(t.sum(t.mul(err, err)));
        opt.step();
    }
    CHECK(nets.predict_discount(x, 1) == doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("zero q net scores everything zero and argmax prefers low indices") {
    ModelNets nets(8, 2, 4);
    nets.init(2);
    for (Tensor* p : nets.q.param_tensors()) p->zero();
    Tensor x(1, 2, 0.25);
    Tensor qv = nets.q_values(x);
    for (double v : qv.data) CHECK(v == 0.0);
    CHECK(argmax_lowest(qv.data.data(), 4) == 0);

    double ties[4] = {1.0, 3.0, 3.0, 1.0};
    CHECK(argmax_lowest(ties, 4) == 1);
}

TEST_CASE("value clips") {
    CHECK(clip_reward(1.7) == 1.0);
    CHECK(clip_reward(-2.3) == -1.0);
    CHECK(clip_reward(0.4) == 0.4);
    CHECK(clip_discount(1.2) == 0.99);
    CHECK(clip_discount(-0.1) == 0.0);
    CHECK(clip_discount(0.8) == 0.8);
}

TEST_CASE("target sync happens exactly at the freeze interval") {
    ModelNets nets(8, 2, 4);
    nets.init(13);
    nets.freeze_interval = 1000;

    // targets start as snapshots
    CHECK(nets.target_q.param_tensors()[0]->data == nets.q.param_tensors()[0]->data);

    // drift the live nets
    nets.q.param_tensors()[0]->data[0] += 1.0;
    nets.encoder.param_tensors()[0]->data[0] += 1.0;

    for (int i = 0; i < 999; ++i) CHECK_FALSE(nets.after_gradient_step());
    CHECK(nets.target_q.param_tensors()[0]->data != nets.q.param_tensors()[0]->data);

    CHECK(nets.after_gradient_step());  // step 1000
    CHECK(nets.target_q.param_tensors()[0]->data == nets.q.param_tensors()[0]->data);
    CHECK(nets.target_encoder.param_tensors()[0]->data == nets.encoder.param_tensors()[0]->data);
    CHECK(nets.steps_since_sync == 0);

    // live updates after the snapshot leave targets behind
    nets.q.param_tensors()[0]->data[0] += 1.0;
    CHECK(nets.target_q.param_tensors()[0]->data != nets.q.param_tensors()[0]->data);
}

TEST_CASE("checkpoint round-trips bit for bit") {
    const char* path = "checkpoint_roundtrip_test.json";
    ModelNets nets(8, 2, 4);
    nets.init(17);
    nets.q.param_tensors()[0]->data[3] = 0.1234567890123456789;
    nets.steps_since_sync = 321;
    RmsProp opt(0.00025);
    nets.attach(opt);
    // give the optimizer some non-trivial state
    for (auto& t : opt.state())
        for (size_t k = 0; k < t.size(); ++k) t.data[k] = 1e-9 + 1e-3 * k;

    save_checkpoint(path, nets, &opt);

    ModelNets loaded(8, 2, 4);
    RmsProp opt2(0.00025);
    loaded.attach(opt2);
    load_checkpoint(path, loaded, &opt2);

    for (size_t i = 0; i < 5; ++i) {
        auto a = i == 0   ? nets.encoder.param_tensors()
                 : i == 1 ? nets.transition.param_tensors()
                 : i == 2 ? nets.reward.param_tensors()
                 : i == 3 ? nets.discount.param_tensors()
                          : nets.q.param_tensors();
        auto b = i == 0   ? loaded.encoder.param_tensors()
                 : i == 1 ? loaded.transition.param_tensors()
                 : i == 2 ? loaded.reward.param_tensors()
                 : i == 3 ? loaded.discount.param_tensors()
                          : loaded.q.param_tensors();
        for (size_t k = 0; k < a.size(); ++k) CHECK(a[k]->data == b[k]->data);
    }
    CHECK(loaded.steps_since_sync == 321);
    CHECK(loaded.target_q.param_tensors()[0]->data == nets.target_q.param_tensors()[0]->data);
    for (size_t i = 0; i < opt.state().size(); ++i)
        CHECK(opt.state()[i].data == opt2.state()[i].data);

    SUBCASE("shape mismatch is rejected") {
        ModelNets wrong(8, 3, 4);
        CHECK_THROWS(load_checkpoint(path, wrong, nullptr));
    }
    std::remove(path);
}

}  // TEST_SUITE
