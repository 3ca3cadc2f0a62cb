#include <tee_internal_api.h>

#define SDP_WORK_SIZE 256

static TEE_Result sdp_transform(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	uint8_t work[SDP_WORK_SIZE];
	size_t i;

	(void)types;
	TEE_MemMove(work, params[1].memref.buffer, params[1].memref.size);

	for (i = 0; i < SDP_WORK_SIZE; i++)
		work[i] = ~work[i];

	return TEE_SUCCESS;
}
