#pragma once

namespace graphpinn {

// A scalar field value together with the input derivatives the operators use.
// du_dt stays zero for time-free (elliptic) evaluations.
template <class T>
struct BasicJet {
  T u{};
  T du_dx{};
  T d2u_dx2{};
  T du_dt{};
};

using Jet = BasicJet<double>;

}  // namespace graphpinn
