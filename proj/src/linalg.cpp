#include "nilderiv/linalg.hpp"

namespace nilderiv {

FqMatrix bind(const FqMatrix& a, const GaloisField& field) {
    return a.unaryExpr([&field](const Fq& x) { return x.bind(field); });
}

}  // namespace nilderiv
