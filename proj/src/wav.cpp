#include "biteweight/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace biteweight {

namespace {

uint32_t rd_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& f, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 2);
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::runtime_error(path + ": malformed WAV header (" + why + ")");
}

}  // namespace

float quantize16(double x) {
  double v = std::lround(x * 32768.0);
  if (v > 32767.0) v = 32767.0;
  if (v < -32768.0) v = -32768.0;
  return static_cast<float>(v / 32768.0);
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open file");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 44) fail(path, "file shorter than minimal header");
  if (std::memcmp(buf.data(), "RIFF", 4) != 0) fail(path, "missing RIFF tag");
  if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0) fail(path, "missing WAVE tag");

  WavData w;
  bool have_fmt = false;
  size_t pos = 12;
  size_t data_off = 0, data_len = 0;
  while (pos + 8 <= buf.size()) {
    const char* tag = reinterpret_cast<const char*>(buf.data() + pos);
    const uint32_t len = rd_u32(buf.data() + pos + 4);
    const size_t body = pos + 8;
    if (body + len > buf.size()) fail(path, "chunk overruns file");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) fail(path, "fmt chunk too short");
      const uint16_t audio_format = rd_u16(buf.data() + body);
      if (audio_format != 1) fail(path, "not PCM");
      w.channels = rd_u16(buf.data() + body + 2);
      w.sample_rate_hz = static_cast<int>(rd_u32(buf.data() + body + 4));
      w.bit_depth = rd_u16(buf.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }
  if (!have_fmt) fail(path, "no fmt chunk");
  if (data_off == 0) fail(path, "no data chunk");
  if (w.bit_depth != 16) fail(path, "only 16-bit PCM supported");
  if (w.channels < 1 || w.channels > 2) fail(path, "only mono/stereo supported");

  const size_t frame = 2 * static_cast<size_t>(w.channels);
  const size_t n = data_len / frame;
  w.samples.resize(n);
  const unsigned char* d = buf.data() + data_off;
  for (size_t i = 0; i < n; ++i) {
    int32_t acc = 0;
    for (int c = 0; c < w.channels; ++c) {
      const size_t o = i * frame + 2 * static_cast<size_t>(c);
      const int16_t s = static_cast<int16_t>(d[o] | (d[o + 1] << 8));
      acc += s;
    }
    w.samples[i] =
        static_cast<float>(acc / static_cast<double>(w.channels) / 32768.0);
  }
  return w;
}

void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate_hz) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open file for writing");
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  wr_u32(f, 36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, 1);  // PCM
  wr_u16(f, 1);  // mono
  wr_u32(f, static_cast<uint32_t>(sample_rate_hz));
  wr_u32(f, static_cast<uint32_t>(sample_rate_hz * 2));
  wr_u16(f, 2);   // block align
  wr_u16(f, 16);  // bits
  f.write("data", 4);
  wr_u32(f, data_len);
  for (float x : samples) {
    double v = std::lround(static_cast<double>(x) * 32768.0);
    if (v > 32767.0) v = 32767.0;
    if (v < -32768.0) v = -32768.0;
    const int16_t s = static_cast<int16_t>(v);
    unsigned char b[2] = {static_cast<unsigned char>(s & 0xff),
                          static_cast<unsigned char>((s >> 8) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 2);
  }
  if (!f) throw std::runtime_error(path + ": write failed");
}

}  // namespace biteweight
