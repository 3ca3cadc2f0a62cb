#include <tee_internal_api.h>

#define SDP_MAX_REGIONS 4

struct sdp_region {
	uint32_t id;
	uint8_t desc[256];
};

static struct sdp_region sdp_regions[SDP_MAX_REGIONS];

static TEE_Result sdp_register(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	TEE_Result res = TEE_ERROR_GENERIC;
	uint8_t desc[256];
	size_t desc_len = params[0].memref.size;

	(void)types;
	if (params[0].memref.buffer == NULL)
		goto err;

	TEE_MemMove(desc, params[0].memref.buffer, desc_len);
	sdp_regions[0].id = 1;
	res = TEE_SUCCESS;
err:
	return res;
}
