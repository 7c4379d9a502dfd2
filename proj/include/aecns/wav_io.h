// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_WAV_IO_H_
#define AECNS_WAV_IO_H_

#include <string>

#include "aecns/waveform.h"

namespace aecns {

// Reads a mono RIFF/WAVE file holding 16-bit PCM (scaled by 1/32768) or
// IEEE binary32 samples. Any other layout, or a sample rate other than
// 16 kHz, raises DataError.
Waveform ReadWav(const std::string& path);

// Writes mono IEEE binary32.
void WriteWav(const std::string& path, const Waveform& wav);

}  // namespace aecns

#endif  // AECNS_WAV_IO_H_
