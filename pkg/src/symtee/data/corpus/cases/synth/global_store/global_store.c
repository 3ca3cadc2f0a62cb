#include <string.h>
#include <stdint.h>

static uint8_t g_store[256];
static uint32_t g_store_len;

void store_put(const void *data, uint32_t len)
{
    memcpy(g_store, data, len);
    g_store_len = len;
}
