#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sgg {

// Word vectors read from a text file with lines "word v1 ... vE".
struct WordVectors {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;
};

// Throws ParseError(line) on malformed lines or inconsistent widths.
WordVectors read_word_vectors(std::istream& in);
WordVectors load_word_vectors(const std::string& path);

}  // namespace sgg
