#pragma once

#include <string>

namespace dr {

// The four routing categories. A covers noise, defocus blur, and JPEG
// artifacts; B covers reflection artifacts; C covers motion blur; D means no
// visible degradation.
enum class Category { A, B, C, D };

inline const char* category_name(Category c) {
  switch (c) {
    case Category::A: return "A";
    case Category::B: return "B";
    case Category::C: return "C";
    default: return "D";
  }
}

// Parses "A".."D" (exact, single letter). Returns false on anything else.
inline bool parse_category(const std::string& s, Category& out) {
  if (s.size() != 1) return false;
  switch (s[0]) {
    case 'A': out = Category::A; return true;
    case 'B': out = Category::B; return true;
    case 'C': out = Category::C; return true;
    case 'D': out = Category::D; return true;
    default: return false;
  }
}

}  // namespace dr
