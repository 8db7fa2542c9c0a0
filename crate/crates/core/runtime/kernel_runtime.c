/*
 * SpMV kernel runtime. The generator splices three fragments into the
 * marker comments below; with all fragments empty the program still builds
 * and writes y = 0 sized from the CSR file.
 *
 * usage: kernel val.bin csr.bin x.bin y.bin threads repeats
 * exit:  0 ok, 1 I/O or format error, 2 dimension mismatch, 64 usage
 */
#define _POSIX_C_SOURCE 200809L
#include <pthread.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <time.h>

/*@@CSR_REMAINDER_BOUNDS@@*/

static const uint64_t *rem_indptr;
static const uint64_t *rem_indices;
static const double *rem_val;

static inline void csr_remainder(unsigned long r0, unsigned long r1,
                                 const double *restrict x, double *restrict y)
{
    for (unsigned long i = r0; i < r1; i++) {
        double acc = y[i];
        for (uint64_t k = rem_indptr[i]; k < rem_indptr[i + 1]; k++)
            acc += rem_val[k] * x[rem_indices[k]];
        y[i] = acc;
    }
}

/*@@DENSE_NESTS@@*/

#ifndef VBRC_NUM_BLOCK_ROWS
#define VBRC_NUM_BLOCK_ROWS 0
#endif

/*@@CHUNK_TABLE@@*/

#ifndef VBRC_NUM_CHUNKS
#define VBRC_NUM_CHUNKS 1
static const unsigned long vbrc_chunks[1][2] = {{0, VBRC_NUM_BLOCK_ROWS}};
#endif

static const double *g_val;
static const double *g_x;
static double *g_y;
static unsigned long g_rows;

static void run_chunk(unsigned long c)
{
#ifdef VBRC_HAVE_BLOCK_ROWS
    for (unsigned long b = vbrc_chunks[c][0]; b < vbrc_chunks[c][1]; b++)
        vbrc_block_rows[b](g_val, g_x, g_y);
#else
    (void)c;
#endif
}

struct worker {
    unsigned long first;
    unsigned long stride;
};

static void *worker_main(void *arg)
{
    const struct worker *w = arg;
    for (unsigned long c = w->first; c < VBRC_NUM_CHUNKS; c += w->stride)
        run_chunk(c);
    return NULL;
}

static int vbrc_spmv(unsigned long threads)
{
#ifndef VBRC_HAVE_BLOCK_ROWS
    memset(g_y, 0, g_rows * sizeof(double));
#endif
    if (threads <= 1) {
        for (unsigned long c = 0; c < VBRC_NUM_CHUNKS; c++)
            run_chunk(c);
        return 0;
    }
    pthread_t tid[threads];
    struct worker ws[threads];
    for (unsigned long t = 0; t < threads; t++) {
        ws[t].first = t;
        ws[t].stride = threads;
        if (pthread_create(&tid[t], NULL, worker_main, &ws[t]) != 0)
            return -1;
    }
    for (unsigned long t = 0; t < threads; t++)
        pthread_join(tid[t], NULL);
    return 0;
}

static void *read_file(const char *path, size_t *len)
{
    FILE *f = fopen(path, "rb");
    if (!f)
        return NULL;
    if (fseek(f, 0, SEEK_END) != 0) {
        fclose(f);
        return NULL;
    }
    long n = ftell(f);
    rewind(f);
    if (n < 0) {
        fclose(f);
        return NULL;
    }
    unsigned char *buf = malloc((size_t)n + 8);
    if (!buf || fread(buf, 1, (size_t)n, f) != (size_t)n) {
        free(buf);
        fclose(f);
        return NULL;
    }
    fclose(f);
    *len = (size_t)n;
    return buf;
}

static uint64_t rd64(const unsigned char *p)
{
    uint64_t v;
    memcpy(&v, p, 8);
    return v;
}

/* VEC1: magic, u64 length, f64 payload. Returns an aligned copy. */
static double *load_vec(const char *path, uint64_t *n)
{
    size_t len;
    unsigned char *buf = read_file(path, &len);
    if (!buf)
        return NULL;
    if (len < 12 || memcmp(buf, "VEC1", 4) != 0) {
        free(buf);
        return NULL;
    }
    *n = rd64(buf + 4);
    if (*n > (len - 12) / 8 || len != 12 + *n * 8) {
        free(buf);
        return NULL;
    }
    double *v = malloc((*n ? *n : 1) * sizeof(double));
    if (v)
        memcpy(v, buf + 12, *n * 8);
    free(buf);
    return v;
}

/* CSRB: magic, u64 rows, u64 nnz, u64 indptr[rows+1], u64 indices[nnz], f64 values[nnz]. */
static int load_csr(const char *path, uint64_t *rows, uint64_t *nnz)
{
    size_t len;
    unsigned char *buf = read_file(path, &len);
    if (!buf)
        return -1;
    if (len < 20 || memcmp(buf, "CSRB", 4) != 0) {
        free(buf);
        return -1;
    }
    *rows = rd64(buf + 4);
    *nnz = rd64(buf + 12);
    if (*rows > len / 8 || *nnz > len / 16 || len != 20 + (*rows + 1) * 8 + *nnz * 16) {
        free(buf);
        return -1;
    }
    uint64_t *ip = malloc((*rows + 1) * 8);
    uint64_t *ix = malloc((*nnz ? *nnz : 1) * 8);
    double *v = malloc((*nnz ? *nnz : 1) * 8);
    if (!ip || !ix || !v) {
        free(buf);
        return -1;
    }
    const unsigned char *p = buf + 20;
    memcpy(ip, p, (*rows + 1) * 8);
    p += (*rows + 1) * 8;
    memcpy(ix, p, *nnz * 8);
    p += *nnz * 8;
    memcpy(v, p, *nnz * 8);
    free(buf);
    rem_indptr = ip;
    rem_indices = ix;
    rem_val = v;
    return 0;
}

static int cmp_u64(const void *a, const void *b)
{
    uint64_t x = *(const uint64_t *)a, y = *(const uint64_t *)b;
    return (x > y) - (x < y);
}

static uint64_t now_ns(void)
{
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (uint64_t)ts.tv_sec * 1000000000ull + (uint64_t)ts.tv_nsec;
}

int main(int argc, char **argv)
{
    if (argc != 7) {
        fprintf(stderr, "usage: %s val.bin csr.bin x.bin y.bin threads repeats\n", argv[0]);
        return 64;
    }
    char *end;
    unsigned long threads = strtoul(argv[5], &end, 10);
    if (*end || threads == 0) {
        fprintf(stderr, "bad thread count: %s\n", argv[5]);
        return 64;
    }
    unsigned long repeats = strtoul(argv[6], &end, 10);
    if (*end || repeats == 0) {
        fprintf(stderr, "bad repeat count: %s\n", argv[6]);
        return 64;
    }

    uint64_t val_len, x_len, rows, nnz;
    double *val = load_vec(argv[1], &val_len);
    if (!val) {
        fprintf(stderr, "cannot read values from %s\n", argv[1]);
        return 1;
    }
    if (load_csr(argv[2], &rows, &nnz) != 0) {
        fprintf(stderr, "cannot read remainder from %s\n", argv[2]);
        return 1;
    }
    double *x = load_vec(argv[3], &x_len);
    if (!x) {
        fprintf(stderr, "cannot read x from %s\n", argv[3]);
        return 1;
    }
#ifdef VBRC_NUM_ROWS
    if (val_len != VBRC_VAL_LEN || rows != VBRC_NUM_ROWS || nnz != VBRC_REMAINDER_NNZ ||
        x_len != VBRC_NUM_COLS) {
        fprintf(stderr,
                "dimension mismatch: val %llu/%lu rows %llu/%lu nnz %llu/%lu x %llu/%lu\n",
                (unsigned long long)val_len, VBRC_VAL_LEN, (unsigned long long)rows,
                VBRC_NUM_ROWS, (unsigned long long)nnz, VBRC_REMAINDER_NNZ,
                (unsigned long long)x_len, VBRC_NUM_COLS);
        return 2;
    }
#endif
    for (uint64_t k = 0; k < nnz; k++) {
        if (rem_indices[k] >= x_len) {
            fprintf(stderr, "dimension mismatch: column %llu outside x\n",
                    (unsigned long long)rem_indices[k]);
            return 2;
        }
    }

    double *y = calloc(rows ? rows : 1, sizeof(double));
    if (!y)
        return 1;
    g_val = val;
    g_x = x;
    g_y = y;
    g_rows = (unsigned long)rows;

    if (vbrc_spmv(threads) != 0)
        return 1;
    uint64_t *samples = malloc(repeats * sizeof(uint64_t));
    if (!samples)
        return 1;
    for (unsigned long r = 0; r < repeats; r++) {
        uint64_t t0 = now_ns();
        if (vbrc_spmv(threads) != 0)
            return 1;
        samples[r] = now_ns() - t0;
    }
    qsort(samples, repeats, sizeof(uint64_t), cmp_u64);
    uint64_t median = repeats % 2 ? samples[repeats / 2]
                                  : (samples[repeats / 2 - 1] + samples[repeats / 2]) / 2;

    FILE *out = fopen(argv[4], "wb");
    if (!out)
        return 1;
    uint64_t n = rows;
    if (fwrite("VEC1", 1, 4, out) != 4 || fwrite(&n, 8, 1, out) != 1 ||
        (n && fwrite(y, 8, n, out) != n)) {
        fclose(out);
        return 1;
    }
    if (fclose(out) != 0)
        return 1;
    printf("median_ns=%llu\n", (unsigned long long)median);
    return 0;
}
