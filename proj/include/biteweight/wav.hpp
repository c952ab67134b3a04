#pragma once

#include <string>
#include <vector>

namespace biteweight {

struct WavData {
  int sample_rate_hz = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<float> samples;  // mono (stereo downmixed by channel average)
};

// Reads a RIFF/WAVE PCM file. Throws std::runtime_error with the offending
// condition on malformed input. 16-bit PCM only; stereo is downmixed.
WavData read_wav(const std::string& path);

// Writes mono 16-bit PCM at 44100 Hz. Samples are clamped to [-1, 1] and
// quantized with s16 = round(x * 32768).
void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate_hz);

// Quantize an arbitrary amplitude onto the 16-bit grid used by read/write,
// so generated audio survives a disk round trip sample-exactly.
float quantize16(double x);

}  // namespace biteweight
