#include "eduvsum/features/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "eduvsum/core/errors.hpp"

namespace eduvsum::features {

namespace {

constexpr double kEps = 1e-8;
constexpr int kMfccCount = 13;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double block_entropy(std::span<const double> values, int blocks) {
    double total = 0.0;
    for (double v : values) total += v * v;
    const std::size_t len = values.size() / blocks;
    double entropy = 0.0;
    for (int b = 0; b < blocks; ++b) {
        double e = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double v = values[b * len + i];
            e += v * v;
        }
        const double p = e / (total + kEps);
        entropy -= p * std::log2(p + kEps);
    }
    return entropy;
}

}  // namespace

namespace detail {

double zero_crossing_rate(std::span<const double> frame) {
    if (frame.size() < 2) return 0.0;
    double count = 0.0;
    for (std::size_t i = 1; i < frame.size(); ++i) count += std::abs(sign(frame[i]) - sign(frame[i - 1]));
    return (count / 2.0) / static_cast<double>(frame.size() - 1);
}

double energy(std::span<const double> frame) {
    if (frame.empty()) return 0.0;
    double sum = 0.0;
    for (double v : frame) sum += v * v;
    return sum / static_cast<double>(frame.size());
}

double energy_entropy(std::span<const double> frame, int blocks) { return block_entropy(frame, blocks); }

std::pair<double, double> spectral_centroid_spread(std::span<const double> magnitude, double sample_rate) {
    const std::size_t n = magnitude.size();
    const double max = n ? *std::max_element(magnitude.begin(), magnitude.end()) : 0.0;
    const double scale = max == 0.0 ? 1.0 / kEps : 1.0 / max;
    double num = 0.0, den = kEps;
    for (std::size_t i = 0; i < n; ++i) {
        const double freq = (i + 1) * (sample_rate / (2.0 * n));
        const double x = magnitude[i] * scale;
        num += freq * x;
        den += x;
    }
    const double centroid = num / den;
    double spread_num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double freq = (i + 1) * (sample_rate / (2.0 * n));
        const double x = magnitude[i] * scale;
        spread_num += (freq - centroid) * (freq - centroid) * x;
    }
    const double spread = std::sqrt(spread_num / den);
    return {centroid / (sample_rate / 2.0), spread / (sample_rate / 2.0)};
}

double spectral_entropy(std::span<const double> magnitude, int blocks) { return block_entropy(magnitude, blocks); }

double spectral_flux(std::span<const double> magnitude, std::span<const double> previous) {
    double sum = 0.0, prev_sum = 0.0;
    for (double v : magnitude) sum += v + kEps;
    for (double v : previous) prev_sum += v + kEps;
    double flux = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        const double d = magnitude[i] / sum - previous[i] / prev_sum;
        flux += d * d;
    }
    return flux;
}

double spectral_rolloff(std::span<const double> magnitude, double fraction) {
    double total = 0.0;
    for (double v : magnitude) total += v * v;
    const double threshold = fraction * total;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        cumulative += magnitude[i] * magnitude[i];
        if (cumulative + kEps > threshold) return static_cast<double>(i) / static_cast<double>(magnitude.size());
    }
    return 0.0;
}

std::vector<std::vector<double>> mfcc_filter_bank(double sample_rate, int num_fft) {
    constexpr double low_freq = 133.33;
    constexpr double lin_step = 200.0 / 3.0;
    constexpr double log_step = 1.0711703;
    constexpr int num_lin = 13;
    const int num_log = sample_rate < 8000 ? 5 : 27;
    const int total = num_lin + num_log;

    std::vector<double> edges(total + 2);
    for (int i = 0; i < num_lin; ++i) edges[i] = low_freq + i * lin_step;
    for (int i = num_lin; i < total + 2; ++i) edges[i] = edges[num_lin - 1] * std::pow(log_step, i - num_lin + 1);

    std::vector<std::vector<double>> bank(total, std::vector<double>(num_fft, 0.0));
    auto bin_freq = [&](int k) { return k / static_cast<double>(num_fft) * sample_rate; };
    for (int f = 0; f < total; ++f) {
        const double lo = edges[f], centre = edges[f + 1], hi = edges[f + 2];
        const double height = 2.0 / (hi - lo);
        const int lo_bin = static_cast<int>(std::floor(lo * num_fft / sample_rate)) + 1;
        const int centre_bin = static_cast<int>(std::floor(centre * num_fft / sample_rate)) + 1;
        const int hi_bin = static_cast<int>(std::floor(hi * num_fft / sample_rate)) + 1;
        for (int k = lo_bin; k < centre_bin && k < num_fft; ++k) {
            bank[f][k] = height / (centre - lo) * (bin_freq(k) - lo);
        }
        for (int k = centre_bin; k < hi_bin && k < num_fft; ++k) {
            bank[f][k] = height / (hi - centre) * (hi - bin_freq(k));
        }
    }
    return bank;
}

std::vector<double> mfcc(std::span<const double> magnitude, const std::vector<std::vector<double>>& bank, int count) {
    const int filters = static_cast<int>(bank.size());
    std::vector<double> log_spec(filters);
    for (int f = 0; f < filters; ++f) {
        double e = 0.0;
        for (std::size_t k = 0; k < magnitude.size(); ++k) e += magnitude[k] * bank[f][k];
        log_spec[f] = std::log10(e + kEps);
    }
    // Orthonormal DCT-II.
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) {
        double acc = 0.0;
        for (int n = 0; n < filters; ++n) {
            acc += log_spec[n] * std::cos(std::numbers::pi * k * (2 * n + 1) / (2.0 * filters));
        }
        out[k] = acc * (k == 0 ? std::sqrt(1.0 / filters) : std::sqrt(2.0 / filters));
    }
    return out;
}

std::array<double, 12> chroma_vector(std::span<const double> magnitude, double sample_rate) {
    const int n = static_cast<int>(magnitude.size());
    constexpr double a0 = 27.5;
    std::vector<int> semitone(n);
    std::vector<int> members;  // bins sharing a semitone, indexed by semitone - min
    int min_semi = 0, max_semi = 0;
    for (int k = 0; k < n; ++k) {
        const double freq = (k + 1) * sample_rate / (2.0 * n);
        semitone[k] = static_cast<int>(std::lround(12.0 * std::log2(freq / a0)));
        if (k == 0 || semitone[k] < min_semi) min_semi = semitone[k];
        if (k == 0 || semitone[k] > max_semi) max_semi = semitone[k];
    }
    members.assign(max_semi - min_semi + 1, 0);
    for (int k = 0; k < n; ++k) ++members[semitone[k] - min_semi];

    std::array<double, 12> chroma{};
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        const double power = magnitude[k] * magnitude[k];
        total += power;
        const int pitch_class = ((semitone[k] % 12) + 12) % 12;
        chroma[pitch_class] += power / members[semitone[k] - min_semi];
    }
    const double norm = total == 0.0 ? kEps : total;
    for (double& c : chroma) c /= norm;
    return chroma;
}

}  // namespace detail

const std::array<std::string, kAudioFeatureDim>& audio_feature_names() {
    static const auto names = [] {
        std::array<std::string, kAudioFeatureDim> n;
        int i = 0;
        for (const char* base : {"zcr", "energy", "energy_entropy", "spectral_centroid", "spectral_spread",
                                 "spectral_entropy", "spectral_flux", "spectral_rolloff"}) {
            n[i++] = base;
        }
        for (int m = 1; m <= 13; ++m) n[i++] = "mfcc_" + std::to_string(m);
        for (int c = 1; c <= 12; ++c) n[i++] = "chroma_" + std::to_string(c);
        n[i++] = "chroma_std";
        for (int b = 0; b < kAudioBaseFeatures; ++b) n[i++] = "delta_" + n[b];
        return n;
    }();
    return names;
}

int short_term_window_count(std::size_t samples, int window_samples, int step_samples) {
    if (window_samples <= 0 || step_samples <= 0 || samples < static_cast<std::size_t>(window_samples)) return 0;
    return static_cast<int>((samples - window_samples) / step_samples) + 1;
}

std::optional<FeatureMatrix> extract_audio_features(const ingest::AudioTrack& track, double window, double step) {
    if (!(window > step && step > 0.0)) {
        fail(ErrorKind::InvalidConfig, "audio analysis requires window > step > 0");
    }
    const double rate = track.sample_rate;
    const int win = static_cast<int>(std::lround(window * rate));
    const int hop = static_cast<int>(std::lround(step * rate));
    const int rows = short_term_window_count(track.samples.size(), win, hop);
    if (rows == 0 || win < 20) return std::nullopt;

    std::vector<double> signal(track.samples.begin(), track.samples.end());
    const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / signal.size();
    double peak = 0.0;
    for (double& v : signal) {
        v -= mean;
        peak = std::max(peak, std::abs(v));
    }
    for (double& v : signal) v /= peak + 1e-10;

    const int num_fft = win / 2;
    const auto bank = detail::mfcc_filter_bank(rate, num_fft);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    std::vector<double> frame(win), magnitude(num_fft), previous(num_fft);
    std::array<double, kAudioBaseFeatures> base{}, prev_base{};

    FeatureMatrix out(rows, kAudioFeatureDim);
    for (int r = 0; r < rows; ++r) {
        std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(r) * hop, win, frame.begin());
        fft.fwd(spectrum, frame);
        for (int k = 0; k < num_fft; ++k) magnitude[k] = std::abs(spectrum[k]) / num_fft;
        if (r == 0) previous = magnitude;

        int i = 0;
        base[i++] = detail::zero_crossing_rate(frame);
        base[i++] = detail::energy(frame);
        base[i++] = detail::energy_entropy(frame);
        const auto [centroid, spread] = detail::spectral_centroid_spread(magnitude, rate);
        base[i++] = centroid;
        base[i++] = spread;
        base[i++] = detail::spectral_entropy(magnitude);
        base[i++] = detail::spectral_flux(magnitude, previous);
        base[i++] = detail::spectral_rolloff(magnitude);
        for (double c : detail::mfcc(magnitude, bank, kMfccCount)) base[i++] = c;
        const auto chroma = detail::chroma_vector(magnitude, rate);
        const double chroma_mean = std::accumulate(chroma.begin(), chroma.end(), 0.0) / 12.0;
        double chroma_var = 0.0;
        for (double c : chroma) {
            base[i++] = c;
            chroma_var += (c - chroma_mean) * (c - chroma_mean);
        }
        base[i++] = std::sqrt(chroma_var / 12.0);

        for (int b = 0; b < kAudioBaseFeatures; ++b) {
            out(r, b) = static_cast<float>(base[b]);
            out(r, kAudioBaseFeatures + b) = r == 0 ? 0.0f : static_cast<float>(base[b] - prev_base[b]);
        }
        prev_base = base;
        previous = magnitude;
    }
    return out;
}

}  // namespace eduvsum::features
