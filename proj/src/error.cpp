#include "mcseg/error.hpp"
#include "mcseg/types.hpp"

#include <cmath>
#include <string>

namespace mcseg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Io: return "io error";
    case ErrorKind::Size: return "size error";
    case ErrorKind::Definedness: return "definedness error";
  }
  return "error";
}

void check_cloud(const PointCloud& cloud) {
  if (cloud.positions.rows() != cloud.colors.rows()) {
    throw DataError("point cloud has " + std::to_string(cloud.positions.rows()) +
                    " positions but " + std::to_string(cloud.colors.rows()) + " colors");
  }
  if (cloud.positions.rows() == 0) throw DataError("point cloud is empty");
  for (Eigen::Index i = 0; i < cloud.positions.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(cloud.positions(i, c))) {
        throw DataError("non-finite coordinate at row " + std::to_string(i));
      }
      const double col = cloud.colors(i, c);
      if (!(col >= 0.0 && col <= 1.0)) {
        throw DataError("color outside [0,1] at row " + std::to_string(i));
      }
    }
  }
}

}  // namespace mcseg
