#include "evf/frames.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "evf/errors.hpp"

namespace fs = std::filesystem;

namespace evf {

void validate_frames(const FrameSequence& seq) {
  if (seq.width <= 0 || seq.height <= 0) throw InvalidParams("frame dims must be positive");
  if (seq.dt_us == 0) throw InvalidParams("dt_us must be positive");
  const std::size_t expect = static_cast<std::size_t>(seq.width) * seq.height;
  for (const auto& f : seq.frames)
    if (f.size() != expect) throw ShapeMismatch("frame size differs from sequence dims");
}

void write_pgm(const std::string& path, const std::uint8_t* data, int width, int height) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create '" + path + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(width) * height);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");

  auto next_token = [&in, &path]() {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {  // comment to end of line
        while ((c = in.get()) != EOF && c != '\n') {}
        continue;
      }
      if (!std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
        return tok;
      }
    }
    throw Error("unexpected end of PGM header in '" + path + "'");
  };

  if (next_token() != "P5") throw Error("'" + path + "' is not a P5 PGM");
  width = std::stoi(next_token());
  height = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (width <= 0 || height <= 0 || maxval != 255)
    throw Error("unsupported PGM geometry in '" + path + "'");

  std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw Error("truncated PGM payload in '" + path + "'");
  return data;
}

void write_frame_dir(const std::string& dir, const FrameSequence& seq,
                     const std::vector<FlowRegime>& labels) {
  validate_frames(seq);
  if (!labels.empty() && labels.size() != seq.frame_count())
    throw InvalidParams("label count differs from frame count");
  fs::create_directories(dir);

  char name[32];
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_pgm((fs::path(dir) / name).string(), seq.frames[i].data(), seq.width, seq.height);
  }

  std::ofstream meta((fs::path(dir) / "meta.txt").string(), std::ios::trunc);
  if (!meta) throw Error("cannot create meta.txt in '" + dir + "'");
  meta << "dt_us=" << seq.dt_us << "\n";
  meta << "t0_us=" << seq.t0_us << "\n";
  if (!labels.empty()) {
    meta << "labels=";
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i) meta << ',';
      meta << to_string(labels[i]);
    }
    meta << "\n";
  }
}

FrameDirContents read_frame_dir(const std::string& dir) {
  FrameDirContents out;

  std::ifstream meta((fs::path(dir) / "meta.txt").string());
  if (!meta) throw Error("missing meta.txt in '" + dir + "'");
  std::string line;
  std::string labels_csv;
  while (std::getline(meta, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "dt_us") out.seq.dt_us = std::stoull(val);
    else if (key == "t0_us") out.seq.t0_us = std::stoull(val);
    else if (key == "labels") labels_csv = val;
  }

  std::vector<fs::path> frame_files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".pgm") frame_files.push_back(entry.path());
  std::sort(frame_files.begin(), frame_files.end());
  if (frame_files.empty()) throw EmptySequence("no .pgm frames in '" + dir + "'");

  for (const auto& p : frame_files) {
    int w = 0, h = 0;
    auto data = read_pgm(p.string(), w, h);
    if (out.seq.frames.empty()) {
      out.seq.width = w;
      out.seq.height = h;
    } else if (w != out.seq.width || h != out.seq.height) {
      throw ShapeMismatch("frame dims differ inside '" + dir + "'");
    }
    out.seq.frames.push_back(std::move(data));
  }

  if (!labels_csv.empty()) {
    std::stringstream ss(labels_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.labels.push_back(regime_from_string(tok));
    if (out.labels.size() != out.seq.frame_count())
      throw InvalidParams("meta.txt label count differs from frame count");
  }
  validate_frames(out.seq);
  return out;
}

}  // namespace evf
