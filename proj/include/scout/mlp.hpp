#pragma once

#include <utility>
#include <vector>

#include "scout/optim.hpp"
#include "scout/rng.hpp"
#include "scout/tape.hpp"
#include "scout/tensor.hpp"

namespace scout {

enum class Act { Linear, Tanh, Relu };

struct LayerSpec {
    int out;
    Act act;
    double dropout = 0.0;  // applied after the activation, train mode only
};

// Fully connected stack. Weights are Glorot-uniform initialized; biases zero.
// forward() is the no-grad path and computes exactly what forward_tape()
// computes when dropout is off, via the same kernels.
class Mlp {
  public:
    Mlp() = default;
    Mlp(int in_dim, std::vector<LayerSpec> layers);

    void init(Rng& rng);

    Tensor forward(const Tensor& x) const;

    // Param node ids for one tape build; bind once, reuse for every forward
    // on that tape so gradients from all uses accumulate into one buffer.
    struct Bound {
        std::vector<std::pair<int, int>> wb;
    };
    Bound bind(Tape& t);
    int forward_tape(Tape& t, const Bound& bound, int x, Rng* dropout_rng = nullptr);

    void attach(RmsProp& opt);

    // copy parameter values from another net of identical shape
    void copy_params_from(const Mlp& src);

    int in_dim() const { return in_dim_; }
    int out_dim() const;
    int num_layers() const { return static_cast<int>(layers_.size()); }
    std::vector<LayerSpec> layer_specs() const;

    // W1, b1, W2, b2, ... in layer order
    std::vector<Tensor*> param_tensors();
    std::vector<const Tensor*> param_tensors() const;
    // gradient buffers aligned with param_tensors()
    std::vector<Tensor*> grad_tensors();

  private:
    struct Layer {
        Tensor W, b, gW, gb;
        Act act;
        double dropout;
    };
    int in_dim_ = 0;
    std::vector<Layer> layers_;
};

}  // namespace scout
