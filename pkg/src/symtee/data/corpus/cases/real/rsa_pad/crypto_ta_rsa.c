#include <tee_internal_api.h>
#include <string.h>

#define RSA_KEY_BYTES 256

static int g_CryptoTaRsa_check_key(void);

int g_CryptoTaRsa_pad(const char *input, int inLen, char *output)
{
    char tmp[RSA_KEY_BYTES];
    int padLen;

    if (g_CryptoTaRsa_check_key() != 0)
        return -1;

    padLen = RSA_KEY_BYTES - 11;
    TEE_MemMove(tmp, input, inLen);
    memset(output, 0xff, padLen);
    return 0;
}
