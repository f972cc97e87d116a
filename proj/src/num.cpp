#include "coarse/num.hpp"

#include <cmath>
#include <sstream>

namespace coarse {

long long ceil_int(const Num& v) {
  if (v.exact()) {
    const Rat& q = v.rat();
    BigInt num = q.numerator();
    BigInt den = q.denominator();  // > 0 by boost::rational invariant
    BigInt quo = num / den;
    if (num > 0 && quo * den != num) quo += 1;
    return static_cast<long long>(quo);
  }
  return static_cast<long long>(std::ceil(v.value() - Num::kEps));
}

Num num_sqrt(const Num& v) {
  return Num::real(std::sqrt(v.value()));
}

std::string num_to_string(const Num& v) {
  if (v.exact()) {
    std::ostringstream os;
    os << v.rat().numerator();
    if (v.rat().denominator() != 1) os << "/" << v.rat().denominator();
    return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << v.value();
  return os.str();
}

Num num_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return Num(Rat(num, den));
  }
  if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
      s.find('E') != std::string::npos) {
    return Num::real(std::stod(s));
  }
  return Num(Rat(BigInt(s)));
}

}  // namespace coarse
