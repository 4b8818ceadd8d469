#include "semoran/io/stack_io.hpp"

namespace semoran::io {

void put_stack(Container& c, const std::string& prefix, const DenseStack<float>& stack) {
  c.put_scalar(prefix + ".layers", static_cast<float>(stack.layers().size()));
  for (std::size_t i = 0; i < stack.layers().size(); ++i) {
    const auto& l = stack.layers()[i];
    const std::string base = prefix + "." + std::to_string(i);
    RowMajorMatrix<float> w = l.weights;
    c.put(base + ".weight",
          NdArray<float>({static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols())},
                         Eigen::Map<const Vector<float>>(w.data(), w.size())));
    c.put(base + ".bias", NdArray<float>({static_cast<std::size_t>(l.bias.size())}, l.bias));
    c.put_scalar(base + ".activation", static_cast<float>(l.activation));
  }
}

DenseStack<float> get_stack(const Container& c, const std::string& prefix) {
  const auto count = c.get_int(prefix + ".layers");
  if (count < 1) throw FormatError(FormatErrc::malformed, prefix + " has no layers");
  std::vector<DenseLayer<float>> layers;
  for (std::int64_t i = 0; i < count; ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    const auto& w = c.get(base + ".weight");
    const auto& b = c.get(base + ".bias");
    if (w.rank() != 2 || b.rank() != 1 || b.shape[0] != w.shape[0])
      throw FormatError(FormatErrc::malformed, base + " has inconsistent weight/bias shapes");
    const auto act = c.get_int(base + ".activation");
    if (act > static_cast<std::int64_t>(Activation::tanh))
      throw FormatError(FormatErrc::malformed, base + " has an unknown activation");
    const auto rows = static_cast<Index>(w.shape[0]), cols = static_cast<Index>(w.shape[1]);
    DenseLayer<float> layer;
    layer.weights = Eigen::Map<const RowMajorMatrix<float>>(w.data.data(), rows, cols);
    layer.bias = b.data;
    layer.activation = static_cast<Activation>(act);
    layers.push_back(std::move(layer));
  }
  try {
    return DenseStack<float>(std::move(layers));
  } catch (const ShapeError& e) {
    throw FormatError(FormatErrc::malformed, prefix + ": " + e.what());
  }
}

}  // namespace semoran::io
