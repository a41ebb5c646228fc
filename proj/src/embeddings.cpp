#include "sgg/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sgg/error.hpp"

namespace sgg {

WordVectors read_word_vectors(std::istream& in) {
  WordVectors out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ss(text);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "bad number '" + tok + "' for word '" + word + "'");
      v.push_back(x);
    }
    if (v.empty()) throw ParseError(line, "word '" + word + "' has no vector");
    if (out.dim == 0) out.dim = v.size();
    if (v.size() != out.dim)
      throw ParseError(line, "vector width " + std::to_string(v.size()) + " differs from " +
                                 std::to_string(out.dim));
    out.vectors[word] = std::move(v);
  }
  return out;
}

WordVectors load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return read_word_vectors(in);
}

}  // namespace sgg
