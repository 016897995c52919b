#pragma once

#include <stdexcept>
#include <vector>

namespace blesim {

// Who can hear whom. reach(tx, rx) is a probability in [0, 1]; self links
// are always 0. A boolean topology uses only 0 and 1.
class LinkMatrix {
 public:
  LinkMatrix() = default;
  explicit LinkMatrix(int n_devices)
      : n_(n_devices), p_(static_cast<std::size_t>(n_devices) * n_devices, 0.0) {}

  int size() const { return n_; }

  double reach(int tx, int rx) const {
    if (tx == rx) return 0.0;
    return p_[static_cast<std::size_t>(tx) * n_ + rx];
  }

  void set(int tx, int rx, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("link probability outside [0,1]");
    if (tx == rx) return;
    p_[static_cast<std::size_t>(tx) * n_ + rx] = p;
  }

 private:
  int n_ = 0;
  std::vector<double> p_;
};

}  // namespace blesim
