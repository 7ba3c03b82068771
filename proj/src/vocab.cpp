// SPDX-License-Identifier: Apache-2.0
#include "hfseq/vocab.hpp"

#include <algorithm>
#include <set>

namespace hfseq {

namespace {
constexpr char32_t kReplacement = 0xFFFD;
}

std::u32string decode_utf8(const std::string& bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const auto n = bytes.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    int extra = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (extra > 0 && i + extra >= n) {
      // truncated sequence at end of input
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= n || (static_cast<unsigned char>(bytes[i + k]) & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3F);
    }
    if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    // reject overlong encodings
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(const std::u32string& text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

Vocabulary Vocabulary::build(const std::u32string& training_text) {
  Vocabulary v;
  std::set<char32_t> distinct(training_text.begin(), training_text.end());
  distinct.erase(kReplacement);  // undecodable input is UNK, not a symbol
  v.id_to_symbol_.assign(distinct.begin(), distinct.end());
  for (std::size_t i = 0; i < v.id_to_symbol_.size(); ++i)
    v.symbol_to_id_[v.id_to_symbol_[i]] = static_cast<int>(i);
  return v;
}

int Vocabulary::encode(char32_t c) const {
  auto it = symbol_to_id_.find(c);
  return it == symbol_to_id_.end() ? unk_id() : it->second;
}

std::vector<int> Vocabulary::encode(const std::u32string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) out.push_back(encode(c));
  return out;
}

char32_t Vocabulary::decode(int id) const {
  if (id < 0 || id > unk_id()) throw DimensionError("symbol id out of range");
  return id == unk_id() ? kReplacement : id_to_symbol_[id];
}

std::u32string Vocabulary::decode(const std::vector<int>& ids) const {
  std::u32string out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(decode(id));
  return out;
}

}  // namespace hfseq
