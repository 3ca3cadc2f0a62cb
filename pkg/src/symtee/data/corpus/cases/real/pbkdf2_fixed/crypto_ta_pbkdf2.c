#include <tee_internal_api.h>
#include <string.h>

#define PBKDF2_ITERATIONS 1000
#define SHA256_LEN 32

static TEE_Result g_CryptoTaHmac_Sha256(const char *key, int keyLen,
                                        const char *msg, int msgLen, char *out);

TEE_Result g_CryptoTaPbkdf_PBKDF2(const char *passwd, int passwdLen,
                                  const char *salt, int saltLen,
                                  char *output, int dkLen)
{
    char resultBuf[512];
    char block[SHA256_LEN];
    TEE_Result ret;
    int i;

    TEE_MemFill(resultBuf, 0, sizeof(resultBuf));
    ret = g_CryptoTaHmac_Sha256(passwd, passwdLen, salt, saltLen, block);
    if (ret != TEE_SUCCESS)
        return TEE_ERROR_GENERIC;

    for (i = 1; i < PBKDF2_ITERATIONS; i++) {
        g_CryptoTaHmac_Sha256(passwd, passwdLen, block, SHA256_LEN, block);
        resultBuf[i % 512] ^= block[i % SHA256_LEN];
    }

    // Fix: Added input validation to prevent buffer overflow
    if (dkLen > 512)
        return TEE_ERROR_BAD_PARAMETERS;
    TEE_MemMove(output, resultBuf, dkLen);
    return TEE_SUCCESS;
}
