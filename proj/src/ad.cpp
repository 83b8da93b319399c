#include "alab/ad.hpp"

namespace alab::ad {

Tape*& active_tape() noexcept {
  thread_local Tape* tape = nullptr;
  return tape;
}

}  // namespace alab::ad
