/* Scalar-multiplication kernel over prime fields.
 *
 * Plain C, no libpython dependency: the Python side loads this as a shared
 * library through ctypes, so calls release the GIL and two worker threads
 * can genuinely run on two cores.
 *
 * Values are little-endian arrays of 64-bit limbs.  Moduli up to 9 limbs
 * (576 bits) are supported, which covers every curve the package ships.
 * Reduction is plain schoolbook division (Knuth D); moduli of the shape
 * 2^(64*n) - c with c < 2^64 take a cheaper fold-the-high-half path.
 *
 * The accumulator inside scalar multiplication is Jacobian (X, Y, Z) to
 * avoid a field inversion per group operation; inputs and outputs are
 * affine, and the affine result is identical to the one the pure-Python
 * path computes step by step.
 */

#include <stdint.h>
#include <string.h>

#define MAXL 9
#define MAXKL 64

typedef uint64_t u64;
typedef __uint128_t u128;

#if defined(_WIN32)
#define EXPORT __declspec(dllexport)
#else
#define EXPORT __attribute__((visibility("default")))
#endif

typedef struct {
    int nl;          /* limbs in p */
    int special;     /* p == 2^(64*nl) - c with c < 2^64 */
    u64 c;           /* fold constant when special */
    int shift;       /* normalization shift for division */
    u64 p[MAXL];
    u64 pn[MAXL];    /* p << shift */
    u64 a[MAXL];     /* curve coefficient, reduced mod p */
    int a_zero;
} ecctx;

/* ---- limb vector helpers (length nl unless stated) ---- */

static void vset(u64 *r, const u64 *x, int nl) { memcpy(r, x, (size_t)nl * 8); }
static void vzero(u64 *r, int nl) { memset(r, 0, (size_t)nl * 8); }

static int vis_zero(const u64 *x, int nl) {
    u64 acc = 0;
    for (int i = 0; i < nl; i++) acc |= x[i];
    return acc == 0;
}

static int vcmp(const u64 *x, const u64 *y, int nl) {
    for (int i = nl - 1; i >= 0; i--) {
        if (x[i] != y[i]) return x[i] < y[i] ? -1 : 1;
    }
    return 0;
}

static u64 vadd(u64 *r, const u64 *x, const u64 *y, int nl) {
    u64 carry = 0;
    for (int i = 0; i < nl; i++) {
        u128 t = (u128)x[i] + y[i] + carry;
        r[i] = (u64)t;
        carry = (u64)(t >> 64);
    }
    return carry;
}

static u64 vsub(u64 *r, const u64 *x, const u64 *y, int nl) {
    u64 borrow = 0;
    for (int i = 0; i < nl; i++) {
        u128 t = (u128)x[i] - y[i] - borrow;
        r[i] = (u64)t;
        borrow = (u64)(t >> 64) & 1;
    }
    return borrow;
}

/* r = x * m + carry-in propagation; x has nl limbs, r gets nl+1 */
static void vmul1(u64 *r, const u64 *x, u64 m, int nl) {
    u64 carry = 0;
    for (int i = 0; i < nl; i++) {
        u128 t = (u128)x[i] * m + carry;
        r[i] = (u64)t;
        carry = (u64)(t >> 64);
    }
    r[nl] = carry;
}

static int clz64(u64 x) {
    int n = 0;
    if (x == 0) return 64;
    while (!(x >> 63)) { x <<= 1; n++; }
    return n;
}

/* ---- modular helpers: operands already reduced below p ---- */

static void mod_add(const ecctx *c, u64 *r, const u64 *x, const u64 *y) {
    u64 carry = vadd(r, x, y, c->nl);
    if (carry || vcmp(r, c->p, c->nl) >= 0) vsub(r, r, c->p, c->nl);
}

static void mod_sub(const ecctx *c, u64 *r, const u64 *x, const u64 *y) {
    if (vsub(r, x, y, c->nl)) vadd(r, r, c->p, c->nl);
}

static void mod_dbl(const ecctx *c, u64 *r, const u64 *x) { mod_add(c, r, x, x); }

/* t has 2*nl limbs; reduce mod p into r via fold: 2^(64*nl) == c (mod p) */
static void red_fold(const ecctx *c, const u64 *t, u64 *r) {
    int nl = c->nl;
    u64 hi[MAXL + 1], acc[MAXL + 1];

    vmul1(hi, t + nl, c->c, nl);               /* hi = H*c, nl+1 limbs */
    acc[nl] = hi[nl] + vadd(acc, t, hi, nl);   /* acc = L + H*c */
    while (acc[nl]) {
        u128 f = (u128)acc[nl] * c->c;
        acc[nl] = 0;
        u64 add0 = (u64)f, add1 = (u64)(f >> 64);
        u128 s = (u128)acc[0] + add0;
        acc[0] = (u64)s;
        u64 carry = (u64)(s >> 64);
        for (int i = 1; i < nl && (carry || add1); i++) {
            s = (u128)acc[i] + carry + (i == 1 ? add1 : 0);
            acc[i] = (u64)s;
            carry = (u64)(s >> 64);
            if (i == 1) add1 = 0;
        }
        acc[nl] += carry;
    }
    while (vcmp(acc, c->p, nl) >= 0) vsub(acc, acc, c->p, nl);
    vset(r, acc, nl);
}

/* t has tn limbs; reduce mod p into r by schoolbook long division */
static void red_div(const ecctx *c, const u64 *t, int tn, u64 *r) {
    int nl = c->nl, s = c->shift;
    u64 u[2 * MAXL + 2];
    int un;

    /* normalize: u = t << s */
    if (s == 0) {
        vset(u, t, tn);
        u[tn] = 0;
    } else {
        u64 carry = 0;
        for (int i = 0; i < tn; i++) {
            u[i] = (t[i] << s) | carry;
            carry = t[i] >> (64 - s);
        }
        u[tn] = carry;
    }
    un = tn + 1;

    const u64 *d = c->pn;
    u64 dtop = d[nl - 1];
    u64 dnext = nl >= 2 ? d[nl - 2] : 0;

    for (int j = un - 1; j >= nl; j--) {
        /* estimate quotient digit from the top two limbs */
        u128 num = ((u128)u[j] << 64) | u[j - 1];
        u64 qhat;
        if (u[j] >= dtop) {
            qhat = ~(u64)0;
        } else {
            qhat = (u64)(num / dtop);
        }
        u64 rhat = (u64)(num - (u128)qhat * dtop);
        /* refine */
        while ((u128)qhat * dnext > (((u128)rhat << 64) | (j >= 2 ? u[j - 2] : 0))) {
            qhat--;
            u128 nr = (u128)rhat + dtop;
            if (nr >> 64) break;
            rhat = (u64)nr;
        }
        /* u[j-nl .. j] -= qhat * d */
        u64 borrow = 0, mc = 0;
        for (int i = 0; i < nl; i++) {
            u128 prod = (u128)qhat * d[i] + mc;
            mc = (u64)(prod >> 64);
            u128 diff = (u128)u[j - nl + i] - (u64)prod - borrow;
            u[j - nl + i] = (u64)diff;
            borrow = (u64)(diff >> 64) & 1;
        }
        u128 diff = (u128)u[j] - mc - borrow;
        u[j] = (u64)diff;
        if ((diff >> 64) & 1) {
            /* qhat was one too large: add divisor back */
            u64 carry = 0;
            for (int i = 0; i < nl; i++) {
                u128 sum = (u128)u[j - nl + i] + d[i] + carry;
                u[j - nl + i] = (u64)sum;
                carry = (u64)(sum >> 64);
            }
            u[j] += carry;
        }
        u[j] = 0; /* quotient digit discarded; remainder stays below d */
    }

    /* denormalize remainder */
    if (s == 0) {
        vset(r, u, nl);
    } else {
        for (int i = 0; i < nl; i++) {
            u64 hi2 = (i + 1 < nl) ? u[i + 1] : 0;
            r[i] = (u[i] >> s) | (hi2 << (64 - s));
        }
    }
}

static void mod_mul(const ecctx *c, u64 *r, const u64 *x, const u64 *y) {
    int nl = c->nl;

    if (nl == 1) {
        r[0] = (u64)(((u128)x[0] * y[0]) % c->p[0]);
        return;
    }

    u64 t[2 * MAXL];
    vzero(t, 2 * nl);
    for (int i = 0; i < nl; i++) {
        u64 carry = 0;
        u64 xi = x[i];
        for (int j = 0; j < nl; j++) {
            u128 acc = (u128)xi * y[j] + t[i + j] + carry;
            t[i + j] = (u64)acc;
            carry = (u64)(acc >> 64);
        }
        t[i + nl] = carry;
    }

    if (c->special) red_fold(c, t, r);
    else red_div(c, t, 2 * nl, r);
}

static void mod_sqr(const ecctx *c, u64 *r, const u64 *x) { mod_mul(c, r, x, x); }

/* r = x^-1 mod p (binary extended gcd); x must be nonzero mod p, p odd */
static int mod_inv(const ecctx *c, u64 *r, const u64 *x) {
    int nl = c->nl;
    u64 a[MAXL], b[MAXL], u[MAXL], v[MAXL];

    vset(a, x, nl);
    vset(b, c->p, nl);
    vzero(u, nl); u[0] = 1;
    vzero(v, nl);

    while (!vis_zero(a, nl)) {
        while (!(a[0] & 1)) {
            /* a >>= 1 */
            for (int i = 0; i < nl - 1; i++) a[i] = (a[i] >> 1) | (a[i + 1] << 63);
            a[nl - 1] >>= 1;
            /* u = u/2 mod p */
            u64 carry = 0;
            if (u[0] & 1) carry = vadd(u, u, c->p, nl);
            for (int i = 0; i < nl - 1; i++) u[i] = (u[i] >> 1) | (u[i + 1] << 63);
            u[nl - 1] = (u[nl - 1] >> 1) | (carry << 63);
        }
        if (vcmp(a, b, nl) < 0) {
            u64 tmp[MAXL];
            vset(tmp, a, nl); vset(a, b, nl); vset(b, tmp, nl);
            vset(tmp, u, nl); vset(u, v, nl); vset(v, tmp, nl);
        }
        vsub(a, a, b, nl);
        mod_sub(c, u, u, v);
    }

    /* gcd in b must be 1 */
    u64 one_check = b[0] ^ 1;
    for (int i = 1; i < nl; i++) one_check |= b[i];
    if (one_check) return -1;
    vset(r, v, nl);
    return 0;
}

/* ---- Jacobian point arithmetic; identity is Z == 0 ---- */

typedef struct { u64 X[MAXL], Y[MAXL], Z[MAXL]; } jpoint;

static void jp_set_inf(jpoint *r, int nl) {
    vzero(r->X, nl); vzero(r->Y, nl); vzero(r->Z, nl);
    r->X[0] = 1; r->Y[0] = 1;
}

static int jp_is_inf(const jpoint *q, int nl) { return vis_zero(q->Z, nl); }

static void jp_double(const ecctx *c, jpoint *r, const jpoint *q) {
    int nl = c->nl;
    u64 xx[MAXL], yy[MAXL], yyyy[MAXL], zz[MAXL];
    u64 s[MAXL], m[MAXL], t[MAXL], t2[MAXL];

    if (jp_is_inf(q, nl) || vis_zero(q->Y, nl)) {
        jp_set_inf(r, nl);
        return;
    }

    mod_sqr(c, xx, q->X);
    mod_sqr(c, yy, q->Y);
    mod_sqr(c, yyyy, yy);
    mod_sqr(c, zz, q->Z);

    /* S = 2*((X+YY)^2 - XX - YYYY) */
    mod_add(c, t, q->X, yy);
    mod_sqr(c, t, t);
    mod_sub(c, t, t, xx);
    mod_sub(c, t, t, yyyy);
    mod_dbl(c, s, t);

    /* M = 3*XX + a*ZZ^2 */
    mod_dbl(c, m, xx);
    mod_add(c, m, m, xx);
    if (!c->a_zero) {
        mod_sqr(c, t, zz);
        mod_mul(c, t, t, c->a);
        mod_add(c, m, m, t);
    }

    /* X3 = M^2 - 2*S */
    mod_sqr(c, t, m);
    mod_sub(c, t, t, s);
    mod_sub(c, t, t, s);

    /* Z3 = (Y+Z)^2 - YY - ZZ  (computed before X/Y clobber q aliasing) */
    mod_add(c, t2, q->Y, q->Z);
    mod_sqr(c, t2, t2);
    mod_sub(c, t2, t2, yy);
    mod_sub(c, t2, t2, zz);
    vset(r->Z, t2, nl);

    /* Y3 = M*(S - X3) - 8*YYYY */
    mod_sub(c, s, s, t);
    mod_mul(c, s, s, m);
    mod_dbl(c, t2, yyyy);
    mod_dbl(c, t2, t2);
    mod_dbl(c, t2, t2);
    mod_sub(c, r->Y, s, t2);

    vset(r->X, t, nl);
}

/* r = q + (x2, y2) with (x2, y2) affine and on the curve */
static void jp_add_affine(const ecctx *c, jpoint *r, const jpoint *q,
                          const u64 *x2, const u64 *y2) {
    int nl = c->nl;
    u64 z1z1[MAXL], u2[MAXL], s2[MAXL];
    u64 h[MAXL], hh[MAXL], ii[MAXL], j[MAXL], rr[MAXL], v[MAXL];
    u64 t[MAXL], t2[MAXL];

    if (jp_is_inf(q, nl)) {
        vset(r->X, x2, nl);
        vset(r->Y, y2, nl);
        vzero(r->Z, nl);
        r->Z[0] = 1;
        return;
    }

    mod_sqr(c, z1z1, q->Z);
    mod_mul(c, u2, x2, z1z1);
    mod_mul(c, s2, y2, q->Z);
    mod_mul(c, s2, s2, z1z1);

    if (vcmp(u2, q->X, nl) == 0) {
        if (vcmp(s2, q->Y, nl) == 0) {
            jp_double(c, r, q);
        } else {
            jp_set_inf(r, nl);
        }
        return;
    }

    mod_sub(c, h, u2, q->X);
    mod_sqr(c, hh, h);
    mod_dbl(c, ii, hh);
    mod_dbl(c, ii, ii);            /* I = 4*HH */
    mod_mul(c, j, h, ii);
    mod_sub(c, rr, s2, q->Y);
    mod_dbl(c, rr, rr);            /* r = 2*(S2 - Y1) */
    mod_mul(c, v, q->X, ii);

    /* X3 = r^2 - J - 2*V */
    mod_sqr(c, t, rr);
    mod_sub(c, t, t, j);
    mod_sub(c, t, t, v);
    mod_sub(c, t, t, v);

    /* Z3 = (Z1 + H)^2 - Z1Z1 - HH */
    mod_add(c, t2, q->Z, h);
    mod_sqr(c, t2, t2);
    mod_sub(c, t2, t2, z1z1);
    mod_sub(c, t2, t2, hh);
    vset(r->Z, t2, nl);

    /* Y3 = r*(V - X3) - 2*Y1*J */
    mod_sub(c, v, v, t);
    mod_mul(c, v, v, rr);
    mod_mul(c, j, j, q->Y);
    mod_dbl(c, j, j);
    mod_sub(c, r->Y, v, j);

    vset(r->X, t, nl);
}

static void ctx_init(ecctx *c, const u64 *p, int nl, const u64 *a) {
    c->nl = nl;
    vset(c->p, p, nl);
    vset(c->a, a, nl);
    c->a_zero = vis_zero(a, nl);

    c->special = 0;
    c->c = 0;
    if (nl >= 2) {
        int all_ones = 1;
        for (int i = 1; i < nl; i++) {
            if (p[i] != ~(u64)0) { all_ones = 0; break; }
        }
        if (all_ones && p[0] != 0) {
            c->special = 1;
            c->c = (u64)(0 - p[0]);
        }
    }

    c->shift = clz64(p[nl - 1]);
    if (c->shift == 0) {
        vset(c->pn, p, nl);
    } else {
        u64 carry = 0;
        for (int i = 0; i < nl; i++) {
            c->pn[i] = (p[i] << c->shift) | carry;
            carry = p[i] >> (64 - c->shift);
        }
    }
}

/* k * (px, py) by MSB-first double-and-add over the bits of k.
 * Returns 1 when the result is the identity, 0 for an affine result
 * written to (rx, ry), negative on invalid arguments. */
EXPORT int eck_scalar_mul(const u64 *p, int nl, const u64 *a,
                          const u64 *k, int knl,
                          const u64 *px, const u64 *py, int pinf,
                          u64 *rx, u64 *ry) {
    ecctx ctx;
    jpoint acc;

    if (nl < 1 || nl > MAXL || knl < 0 || knl > MAXKL) return -1;

    ctx_init(&ctx, p, nl, a);

    if (pinf) return 1;

    /* locate top set bit of k */
    int top = -1;
    for (int i = knl - 1; i >= 0 && top < 0; i--) {
        if (k[i]) top = i * 64 + 63 - clz64(k[i]);
    }
    if (top < 0) return 1; /* k == 0 */

    jp_set_inf(&acc, nl);
    for (int bit = top; bit >= 0; bit--) {
        jp_double(&ctx, &acc, &acc);
        if ((k[bit / 64] >> (bit % 64)) & 1) {
            jp_add_affine(&ctx, &acc, &acc, px, py);
        }
    }

    if (jp_is_inf(&acc, nl)) return 1;

    u64 zi[MAXL], zi2[MAXL];
    if (mod_inv(&ctx, zi, acc.Z) != 0) return -2;
    mod_sqr(&ctx, zi2, zi);
    mod_mul(&ctx, rx, acc.X, zi2);
    mod_mul(&ctx, zi2, zi2, zi);
    mod_mul(&ctx, ry, acc.Y, zi2);
    return 0;
}

/* Sanity probe used by the loader to verify the library works: computes
 * 2*(3,10) on y^2 = x^3 + x + 1 over F_23 and checks the result is (7,12). */
EXPORT int eck_selftest(void) {
    u64 p = 23, a = 1, k = 2, px = 3, py = 10, rx = 0, ry = 0;
    int rc = eck_scalar_mul(&p, 1, &a, &k, 1, &px, &py, 0, &rx, &ry);
    if (rc != 0) return 1;
    return (rx == 7 && ry == 12) ? 0 : 2;
}

#ifdef ECK_BENCH_MAIN
#include <stdio.h>
#include <time.h>

static double now_ms(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts.tv_sec * 1e3 + ts.tv_nsec / 1e6;
}

int main(void) {
    /* secp256k1 */
    u64 p[4] = {0xFFFFFFFEFFFFFC2FULL, 0xFFFFFFFFFFFFFFFFULL,
                0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL};
    u64 a[4] = {0, 0, 0, 0};
    u64 gx[4] = {0x59F2815B16F81798ULL, 0x029BFCDB2DCE28D9ULL,
                 0x55A06295CE870B07ULL, 0x79BE667EF9DCBBACULL};
    u64 gy[4] = {0x9C47D08FFB10D4B8ULL, 0xFD17B448A6855419ULL,
                 0x5DA4FBFC0E1108A8ULL, 0x483ADA7726A3C465ULL};
    u64 k[4] = {0x0011223344556677ULL, 0x6789ABCDEF001122ULL,
                0xADC0DE0DEADBEEFULL, 0x0C0FFEE0FACADE0BULL};
    u64 rx[4], ry[4];

    printf("selftest: %d\n", eck_selftest());

    int iters = 2000;
    double t0 = now_ms();
    for (int i = 0; i < iters; i++) {
        k[0] = 0x0011223344556677ULL + (u64)i;
        eck_scalar_mul(p, 4, a, k, 4, gx, gy, 0, rx, ry);
    }
    double dt = now_ms() - t0;
    printf("secp256k1 (fold path): %.3f ms per scalar_mul\n", dt / iters);

    /* secp256r1: generic division path */
    u64 pr[4] = {0xFFFFFFFFFFFFFFFFULL, 0x00000000FFFFFFFFULL,
                 0x0000000000000000ULL, 0xFFFFFFFF00000001ULL};
    u64 ar[4] = {0xFFFFFFFFFFFFFFFCULL, 0x00000000FFFFFFFFULL,
                 0x0000000000000000ULL, 0xFFFFFFFF00000001ULL};
    u64 grx[4] = {0xF4A13945D898C296ULL, 0x77037D812DEB33A0ULL,
                  0xF8BCE6E563A440F2ULL, 0x6B17D1F2E12C4247ULL};
    u64 gry[4] = {0xCBB6406837BF51F5ULL, 0x2BCE33576B315ECEULL,
                  0x8EE7EB4A7C0F9E16ULL, 0x4FE342E2FE1A7F9BULL};
    iters = 500;
    t0 = now_ms();
    for (int i = 0; i < iters; i++) {
        k[0] = 0x0011223344556677ULL + (u64)i;
        eck_scalar_mul(pr, 4, ar, k, 4, grx, gry, 0, rx, ry);
    }
    dt = now_ms() - t0;
    printf("secp256r1 (div path):  %.3f ms per scalar_mul\n", dt / iters);
    return 0;
}
#endif
