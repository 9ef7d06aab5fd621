#include "wavefuse/wavelet.hpp"

#include <string>

#include "wavefuse/error.hpp"

namespace wavefuse {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt3 = 1.73205080756887729353;

// Per-line temporaries reused across an image so each transform allocates
// only once per direction.
struct Scratch {
    std::vector<double> x, s, d, s1, d1;
    void resize(int n) {
        int m = (n + 1) / 2;
        x.resize(2 * static_cast<std::size_t>(m));
        s.resize(m);
        d.resize(m);
        s1.resize(m);
        d1.resize(m);
    }
};

void haar_analysis(Scratch& t, int m) {
    for (int l = 0; l < m; ++l) {
        double a = t.x[2 * l], b = t.x[2 * l + 1];
        t.s[l] = (a + b) / kSqrt2;
        t.d[l] = (a - b) / kSqrt2;
    }
}

void haar_synthesis(Scratch& t, int m) {
    for (int l = 0; l < m; ++l) {
        t.x[2 * l] = (t.s[l] + t.d[l]) / kSqrt2;
        t.x[2 * l + 1] = (t.s[l] - t.d[l]) / kSqrt2;
    }
}

// D4 filters via their lifting factorization. Clamping the lane lookups at
// the ends realizes the symmetric extension, and because synthesis replays
// the identical lookups the round trip is exact for any length.
void db2_analysis(Scratch& t, int m) {
    for (int l = 0; l < m; ++l)
        t.s1[l] = t.x[2 * l] + kSqrt3 * t.x[2 * l + 1];
    for (int l = 0; l < m; ++l) {
        double prev = t.s1[l > 0 ? l - 1 : 0];
        t.d1[l] = t.x[2 * l + 1] - kSqrt3 / 4.0 * t.s1[l] - (kSqrt3 - 2.0) / 4.0 * prev;
    }
    for (int l = 0; l < m; ++l) {
        double next = t.d1[l + 1 < m ? l + 1 : m - 1];
        t.s[l] = (t.s1[l] - next) * ((kSqrt3 - 1.0) / kSqrt2);
        t.d[l] = t.d1[l] * ((kSqrt3 + 1.0) / kSqrt2);
    }
}

void db2_synthesis(Scratch& t, int m) {
    for (int l = 0; l < m; ++l)
        t.d1[l] = t.d[l] * ((kSqrt3 - 1.0) / kSqrt2);
    for (int l = 0; l < m; ++l) {
        double next = t.d1[l + 1 < m ? l + 1 : m - 1];
        t.s1[l] = t.s[l] * ((kSqrt3 + 1.0) / kSqrt2) + next;
    }
    for (int l = 0; l < m; ++l) {
        double prev = t.s1[l > 0 ? l - 1 : 0];
        t.x[2 * l + 1] = t.d1[l] + kSqrt3 / 4.0 * t.s1[l] + (kSqrt3 - 2.0) / 4.0 * prev;
        t.x[2 * l] = t.s1[l] - kSqrt3 * t.x[2 * l + 1];
    }
}

// Gathers a strided line of length n, pads odd n by repeating the last
// sample, and writes ceil(n/2) smooth/detail samples back through strides.
void analyze_line(const double* src, int n, int stride, WaveletBasis basis,
                  double* s_dst, double* d_dst, int dst_stride, Scratch& t) {
    int m = (n + 1) / 2;
    for (int i = 0; i < n; ++i)
        t.x[i] = src[static_cast<std::size_t>(i) * stride];
    if (n & 1)
        t.x[n] = t.x[n - 1];
    if (basis == WaveletBasis::Haar)
        haar_analysis(t, m);
    else
        db2_analysis(t, m);
    for (int l = 0; l < m; ++l) {
        s_dst[static_cast<std::size_t>(l) * dst_stride] = t.s[l];
        d_dst[static_cast<std::size_t>(l) * dst_stride] = t.d[l];
    }
}

void synthesize_line(const double* s_src, const double* d_src, int src_stride,
                     int n, WaveletBasis basis, double* dst, int stride, Scratch& t) {
    int m = (n + 1) / 2;
    for (int l = 0; l < m; ++l) {
        t.s[l] = s_src[static_cast<std::size_t>(l) * src_stride];
        t.d[l] = d_src[static_cast<std::size_t>(l) * src_stride];
    }
    if (basis == WaveletBasis::Haar)
        haar_synthesis(t, m);
    else
        db2_synthesis(t, m);
    for (int i = 0; i < n; ++i)
        dst[static_cast<std::size_t>(i) * stride] = t.x[i];
}

void require_plane(const ImagePlanar& img, const char* where) {
    if (img.channels != 1)
        throw Error(ErrorKind::Invalid, std::string(where) + ": single-channel image required");
    if (img.height < 1 || img.width < 1)
        throw Error(ErrorKind::Invalid, std::string(where) + ": empty image");
}

} // namespace

Subbands dwt2_level(const ImagePlanar& img, WaveletBasis basis) {
    require_plane(img, "dwt2_level");
    if (img.height < 2 || img.width < 2)
        throw Error(ErrorKind::Invalid, "dwt2_level: image must be at least 2x2");
    const int h = img.height, w = img.width;
    const int hc = (h + 1) / 2, wc = (w + 1) / 2;

    Scratch t;
    t.resize(w > h ? w : h);

    ImagePlanar rowl = make_gray(h, wc), rowh = make_gray(h, wc);
    for (int y = 0; y < h; ++y)
        analyze_line(&img.data[static_cast<std::size_t>(y) * w], w, 1, basis,
                     &rowl.data[static_cast<std::size_t>(y) * wc],
                     &rowh.data[static_cast<std::size_t>(y) * wc], 1, t);

    Subbands sb{make_gray(hc, wc), make_gray(hc, wc), make_gray(hc, wc), make_gray(hc, wc)};
    for (int x = 0; x < wc; ++x) {
        analyze_line(&rowl.data[x], h, wc, basis, &sb.ll.data[x], &sb.lh.data[x], wc, t);
        analyze_line(&rowh.data[x], h, wc, basis, &sb.hl.data[x], &sb.hh.data[x], wc, t);
    }
    return sb;
}

ImagePlanar idwt2_level(const Subbands& sb, WaveletBasis basis, int target_height,
                        int target_width) {
    require_plane(sb.ll, "idwt2_level");
    if (!sb.ll.same_shape(sb.lh) || !sb.ll.same_shape(sb.hl) || !sb.ll.same_shape(sb.hh))
        throw Error(ErrorKind::Invalid, "idwt2_level: subband shapes differ");
    const int hc = sb.ll.height, wc = sb.ll.width;
    if (target_height < 2 || target_width < 2 || (target_height + 1) / 2 != hc ||
        (target_width + 1) / 2 != wc)
        throw Error(ErrorKind::Invalid, "idwt2_level: target size does not match subbands");

    Scratch t;
    t.resize(target_width > target_height ? target_width : target_height);

    ImagePlanar rowl = make_gray(target_height, wc), rowh = make_gray(target_height, wc);
    for (int x = 0; x < wc; ++x) {
        synthesize_line(&sb.ll.data[x], &sb.lh.data[x], wc, target_height, basis,
                        &rowl.data[x], wc, t);
        synthesize_line(&sb.hl.data[x], &sb.hh.data[x], wc, target_height, basis,
                        &rowh.data[x], wc, t);
    }

    ImagePlanar out = make_gray(target_height, target_width);
    for (int y = 0; y < target_height; ++y)
        synthesize_line(&rowl.data[static_cast<std::size_t>(y) * wc],
                        &rowh.data[static_cast<std::size_t>(y) * wc], 1, target_width,
                        basis, &out.data[static_cast<std::size_t>(y) * target_width], 1, t);
    return out;
}

WaveletPyramid decompose(const ImagePlanar& img, int levels, WaveletBasis basis) {
    require_plane(img, "decompose");
    if (levels < 1)
        throw Error(ErrorKind::Invalid, "decompose: levels must be >= 1");
    int min_dim = img.height < img.width ? img.height : img.width;
    if (min_dim >> levels < 1)
        throw Error(ErrorKind::Invalid,
                    "decompose: image too small for " + std::to_string(levels) + " levels");

    WaveletPyramid pyr;
    pyr.levels = levels;
    pyr.input_height = img.height;
    pyr.input_width = img.width;
    pyr.basis = basis;
    pyr.details.reserve(levels);

    ImagePlanar cur = img;
    for (int j = 0; j < levels; ++j) {
        Subbands sb = dwt2_level(cur, basis);
        pyr.details.push_back({std::move(sb.lh), std::move(sb.hl), std::move(sb.hh)});
        cur = std::move(sb.ll);
    }
    pyr.approx = std::move(cur);
    return pyr;
}

ImagePlanar reconstruct(const WaveletPyramid& pyr) {
    if (pyr.levels < 1 || static_cast<int>(pyr.details.size()) != pyr.levels)
        throw Error(ErrorKind::Invalid, "reconstruct: malformed pyramid");

    // Shape chain for each level: level j consumes a ceil(H/2^(j+1)) LL.
    std::vector<int> hs(pyr.levels + 1), ws(pyr.levels + 1);
    hs[0] = pyr.input_height;
    ws[0] = pyr.input_width;
    for (int j = 1; j <= pyr.levels; ++j) {
        hs[j] = (hs[j - 1] + 1) / 2;
        ws[j] = (ws[j - 1] + 1) / 2;
    }
    if (pyr.approx.height != hs[pyr.levels] || pyr.approx.width != ws[pyr.levels] ||
        pyr.approx.channels != 1)
        throw Error(ErrorKind::Invalid, "reconstruct: approximation shape mismatch");
    for (int j = 0; j < pyr.levels; ++j) {
        const DetailTriple& dt = pyr.details[j];
        if (dt.lh.height != hs[j + 1] || dt.lh.width != ws[j + 1] ||
            !dt.lh.same_shape(dt.hl) || !dt.lh.same_shape(dt.hh))
            throw Error(ErrorKind::Invalid, "reconstruct: detail shape mismatch at level " +
                                                std::to_string(j + 1));
    }

    ImagePlanar cur = pyr.approx;
    for (int j = pyr.levels - 1; j >= 0; --j) {
        const DetailTriple& dt = pyr.details[j];
        Subbands sb{std::move(cur), dt.lh, dt.hl, dt.hh};
        cur = idwt2_level(sb, pyr.basis, hs[j], ws[j]);
    }
    return cur;
}

} // namespace wavefuse
