#include "sunaa/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace sunaa {

void require_columnwise_simplex(const Mat& m, const char* what) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double v = m(i, j);
            if (v < -kNegativityTol) {
                throw std::invalid_argument(std::string(what) + ": negative entry " +
                                            std::to_string(v) + " in column " + std::to_string(j));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSumTol) {
            throw std::invalid_argument(std::string(what) + ": column " + std::to_string(j) +
                                        " sums to " + std::to_string(sum));
        }
    }
}

SpectralLibrary::SpectralLibrary(Mat d, std::optional<std::vector<std::string>> names)
    : d_(std::move(d)), names_(std::move(names)) {
    require_finite(d_, "SpectralLibrary");
    if (names_ && names_->size() != d_.cols()) {
        throw std::invalid_argument("SpectralLibrary: name count does not match column count");
    }
}

DataCube::DataCube(Mat y, std::size_t height, std::size_t width)
    : y_(std::move(y)), height_(height), width_(width) {
    require_finite(y_, "DataCube");
    if (height_ * width_ != y_.cols()) {
        throw std::invalid_argument("DataCube: height*width = " + std::to_string(height_ * width_) +
                                    " but matrix has " + std::to_string(y_.cols()) + " pixels");
    }
}

ContributionMatrix::ContributionMatrix(Mat b) : b_(std::move(b)) {
    require_finite(b_, "ContributionMatrix");
    require_columnwise_simplex(b_, "ContributionMatrix");
}

AbundanceMatrix::AbundanceMatrix(Mat a) : a_(std::move(a)) {
    require_finite(a_, "AbundanceMatrix");
    require_columnwise_simplex(a_, "AbundanceMatrix");
}

}  // namespace sunaa
