#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdmflow {

std::string b64_encode(const std::uint8_t* data, std::size_t n);
std::string b64_encode(const std::vector<std::uint8_t>& data);
std::string b64_encode(const std::string& data);

// Throws Error("bad-base64") on garbage input.
std::vector<std::uint8_t> b64_decode(const std::string& text);

} // namespace pdmflow
