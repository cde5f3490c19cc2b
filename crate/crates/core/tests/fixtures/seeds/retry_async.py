def retry_async(coroutine_factory, attempts=3):
    import asyncio
    async def runner():
        delay = 0.1
        for attempt in range(attempts):
            try:
                return await coroutine_factory()
            except ConnectionError:
                await asyncio.sleep(delay)
                delay *= 2
        raise TimeoutError("gave up")
    return asyncio.run(runner())
