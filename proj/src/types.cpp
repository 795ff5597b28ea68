#include "hidalgo/types.hpp"

#include <cmath>
#include <unordered_set>

namespace hidalgo {

void validate(const Dataset& data) {
  const Index n = data.rows();
  const Index d = data.dim();
  if (n < 3) throw std::invalid_argument("dataset needs at least 3 observations");
  if (d < 1) throw std::invalid_argument("dataset needs at least 1 dimension");
  if (static_cast<Index>(data.ids.size()) != n)
    throw std::invalid_argument("dataset has " + std::to_string(n) + " rows but " +
                                std::to_string(data.ids.size()) + " labels");
  if (!data.points.allFinite())
    throw std::invalid_argument("dataset contains non-finite entries");
  std::unordered_set<std::string> seen;
  seen.reserve(data.ids.size());
  for (const auto& id : data.ids) {
    if (!seen.insert(id).second)
      throw std::invalid_argument("duplicate row label: " + id);
  }
}

Dataset make_dataset(Matrix points) {
  Dataset data;
  data.points = std::move(points);
  data.ids.reserve(data.points.rows());
  for (Index i = 0; i < data.points.rows(); ++i)
    data.ids.push_back(std::to_string(i + 1));
  return data;
}

}  // namespace hidalgo
