#include "cwcs/cycles.hpp"

namespace cwcs {

std::vector<const Cycle*> CycleBasis::of_dimension(int k) const {
  std::vector<const Cycle*> out;
  for (const auto& c : cycles) {
    if (c.dim == k) out.push_back(&c);
  }
  return out;
}

Complex period(const MatrixForm& form, const Cycle& cycle) {
  if (form.rank() != 1) throw FormError("period: form must be scalar");
  if (form.degree() != cycle.dim) {
    throw FormError("period: form degree " + std::to_string(form.degree()) +
                    " does not match cycle '" + cycle.label + "' of dimension " +
                    std::to_string(cycle.dim));
  }
  Complex sum{};
  for (const auto& t : cycle.terms) sum += t.weight * form.at(t.node, t.mask);
  return sum;
}

Cycle coordinate_cycle(const ChartGrid& grid, IndexMask axes, std::vector<int> pinned,
                       std::string label, double orientation) {
  const int d = grid.dim();
  pinned.resize(d, 0);
  Cycle c;
  c.label = std::move(label);
  c.dim = mask_degree(axes);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    bool on = true;
    double w = orientation;
    for (int a = 0; a < d; ++a) {
      const int i = grid.axis_index(node, a);
      if (axes & (IndexMask{1} << a)) {
        w *= grid.axis_weight(a, i);
      } else if (i != pinned[a]) {
        on = false;
        break;
      }
    }
    if (on) c.terms.push_back({node, axes, w});
  }
  return c;
}

}  // namespace cwcs
