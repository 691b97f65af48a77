#pragma once

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "retain/error.hpp"

namespace retain::crypto {

inline std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = digits[data[i] >> 4];
    out[2 * i + 1] = digits[data[i] & 0xf];
  }
  return out;
}

inline std::vector<unsigned char> from_hex(std::string_view hex) {
  std::vector<unsigned char> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned v = 0;
    if (std::sscanf(std::string(hex.substr(2 * i, 2)).c_str(), "%2x", &v) != 1) {
      fail(ErrorKind::validation, "bad hex string");
    }
    out[i] = static_cast<unsigned char>(v);
  }
  return out;
}

inline std::vector<unsigned char> secure_random(std::size_t n) {
  std::vector<unsigned char> buf(n);
  if (RAND_bytes(buf.data(), static_cast<int>(n)) != 1) fail(ErrorKind::transport, "CSPRNG failure");
  return buf;
}

// 256-bit token, hex encoded.
inline std::string random_token() {
  const auto bytes = secure_random(32);
  return to_hex(bytes.data(), bytes.size());
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::transport, "sha256 failure");
  }
  return to_hex(digest, len);
}

namespace detail {

inline std::vector<unsigned char> pbkdf2(std::string_view password, const std::vector<unsigned char>& salt,
                                         int iterations) {
  std::vector<unsigned char> out(32);
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(), static_cast<int>(salt.size()),
                        iterations, EVP_sha256(), static_cast<int>(out.size()), out.data()) != 1) {
    fail(ErrorKind::transport, "pbkdf2 failure");
  }
  return out;
}

}  // namespace detail

// "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>"
inline std::string hash_password(std::string_view password, int iterations) {
  const auto salt = secure_random(16);
  const auto dk = detail::pbkdf2(password, salt, iterations);
  return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + to_hex(salt.data(), salt.size()) + "$" +
         to_hex(dk.data(), dk.size());
}

inline bool verify_password(std::string_view password, const std::string& stored) {
  const auto p1 = stored.find('$');
  const auto p2 = stored.find('$', p1 + 1);
  const auto p3 = stored.find('$', p2 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos ||
      stored.substr(0, p1) != "pbkdf2-sha256") {
    return false;
  }
  const int iterations = std::stoi(stored.substr(p1 + 1, p2 - p1 - 1));
  const auto salt = from_hex(std::string_view(stored).substr(p2 + 1, p3 - p2 - 1));
  const auto expected = from_hex(std::string_view(stored).substr(p3 + 1));
  const auto actual = detail::pbkdf2(password, salt, iterations);
  return expected.size() == actual.size() && CRYPTO_memcmp(expected.data(), actual.data(), actual.size()) == 0;
}

}  // namespace retain::crypto
