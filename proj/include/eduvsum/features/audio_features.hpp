#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eduvsum/features/backend.hpp"
#include "eduvsum/ingest/media.hpp"

namespace eduvsum::features {

inline constexpr double kDefaultAudioWindow = 0.050;  // seconds
inline constexpr double kDefaultAudioStep = 0.025;

// Column names of the 68-wide short-term matrix: 34 base descriptors
// followed by their first-order deltas ("delta_" prefix).
const std::array<std::string, kAudioFeatureDim>& audio_feature_names();

// Number of analysis windows for `samples` samples.
int short_term_window_count(std::size_t samples, int window_samples, int step_samples);

// Short-term descriptors over sliding windows: zero-crossing rate, energy,
// entropy of energy, spectral centroid and spread, spectral entropy, flux and
// roll-off, 13 MFCCs, 12 chroma bins and chroma deviation, plus deltas (row 0
// deltas are zero). The waveform is mean-removed and peak-normalized first.
// Returns nullopt when the track is shorter than one window.
std::optional<FeatureMatrix> extract_audio_features(const ingest::AudioTrack& track,
                                                    double window = kDefaultAudioWindow,
                                                    double step = kDefaultAudioStep);

namespace detail {

double zero_crossing_rate(std::span<const double> frame);
double energy(std::span<const double> frame);
double energy_entropy(std::span<const double> frame, int blocks = 10);
std::pair<double, double> spectral_centroid_spread(std::span<const double> magnitude, double sample_rate);
double spectral_entropy(std::span<const double> magnitude, int blocks = 10);
double spectral_flux(std::span<const double> magnitude, std::span<const double> previous);
double spectral_rolloff(std::span<const double> magnitude, double fraction = 0.90);

// Triangular filter bank (13 linear + 27 log filters), num_filters x num_fft.
std::vector<std::vector<double>> mfcc_filter_bank(double sample_rate, int num_fft);
std::vector<double> mfcc(std::span<const double> magnitude, const std::vector<std::vector<double>>& bank,
                         int count = 13);
std::array<double, 12> chroma_vector(std::span<const double> magnitude, double sample_rate);

}  // namespace detail

}  // namespace eduvsum::features
