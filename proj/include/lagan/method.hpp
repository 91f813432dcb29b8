#pragma once

#include <array>
#include <string>
#include <string_view>

namespace lagan {

enum class Method { gan, ssgan, ssgan_ms, dagan, dagan_plus, dagan_md, ssgan_la, ssgan_la_plus };

inline constexpr std::array<Method, 8> kAllMethods = {
    Method::gan,      Method::ssgan,    Method::ssgan_ms, Method::dagan,
    Method::dagan_plus, Method::dagan_md, Method::ssgan_la, Method::ssgan_la_plus};

std::string_view to_string(Method m);
// Throws std::invalid_argument on an unknown name.
Method parse_method(std::string_view name);

// Methods whose objective trades off a GAN task against a self-supervised
// task and therefore take lambda_d / lambda_g.
bool uses_tradeoff(Method m);
// Methods that push every sample through all K transforms.
bool uses_all_transforms(Method m);

}  // namespace lagan
