#pragma once

#include "semoran/io/container.hpp"
#include "semoran/nn/stack.hpp"

#include <string>

namespace semoran::io {

/// Stores a dense stack as `<prefix>.layers` plus per-layer
/// `<prefix>.<i>.weight` ([out, in], row-major), `.bias` and `.activation`.
void put_stack(Container& c, const std::string& prefix, const DenseStack<float>& stack);
DenseStack<float> get_stack(const Container& c, const std::string& prefix);

}  // namespace semoran::io
