#include "lagan/method.hpp"

#include <stdexcept>

namespace lagan {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::gan: return "gan";
    case Method::ssgan: return "ssgan";
    case Method::ssgan_ms: return "ssgan_ms";
    case Method::dagan: return "dagan";
    case Method::dagan_plus: return "dagan_plus";
    case Method::dagan_md: return "dagan_md";
    case Method::ssgan_la: return "ssgan_la";
    case Method::ssgan_la_plus: return "ssgan_la_plus";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : kAllMethods)
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

bool uses_tradeoff(Method m) {
  return m == Method::ssgan || m == Method::ssgan_ms || m == Method::ssgan_la_plus;
}

bool uses_all_transforms(Method m) {
  return m == Method::dagan || m == Method::dagan_plus || m == Method::dagan_md ||
         m == Method::ssgan_la;
}

}  // namespace lagan
