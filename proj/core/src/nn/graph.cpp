#include "molgen/nn/tape.hpp"

namespace molgen::nn {

template class Tape<float>;
template class Tape<double>;

}  // namespace molgen::nn
