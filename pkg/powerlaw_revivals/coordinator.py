import asyncio
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from typing import Any, Callable, Generic, List, Optional, Sequence, Tuple, TypeVar

from numpy.linalg import LinAlgError

from .exceptions import DomainError, NumericalError, RevivalsError

_LOGGER = logging.getLogger(__name__)

P = TypeVar("P")
T = TypeVar("T")


@dataclass
class SweepResult(Generic[T]):
    """Class for holding the outcome of one sweep point."""

    index: int
    value: Any
    result: Optional[T] = None
    error: Optional[RevivalsError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class SweepCoordinator:
    """Class to run sweep points concurrently and gather them in input order."""

    def __init__(self, jobs: int = 1) -> None:
        """Initialize the coordinator.

        Args:
            jobs: Maximum number of points evaluated at the same time
        """
        if jobs < 1:
            raise DomainError("jobs must be at least 1", jobs=jobs)
        self.jobs = jobs

    async def async_run(
        self, points: Sequence[Tuple[Any, P]], job: Callable[[P], T]
    ) -> List[SweepResult[T]]:
        """Evaluate job on every point.

        Args:
            points: (sweep value, job argument) pairs
            job: Blocking callable run on a worker thread

        Returns:
            One result per point, in the order of points
        """
        loop = asyncio.get_running_loop()
        semaphore = asyncio.Semaphore(self.jobs)
        _LOGGER.info("Running %d sweep points with %d jobs", len(points), self.jobs)

        with ThreadPoolExecutor(max_workers=self.jobs) as executor:

            async def _run_point(index: int, value: Any, argument: P) -> SweepResult[T]:
                async with semaphore:
                    _LOGGER.debug("Sweep point %d: %s", index, value)
                    try:
                        result = await loop.run_in_executor(executor, job, argument)
                    except RevivalsError as err:
                        _LOGGER.error("Error at sweep value %s: %s", value, err)
                        return SweepResult(index=index, value=value, error=err)
                    except (LinAlgError, ArithmeticError) as err:
                        failure = NumericalError(
                            str(err) or "numerical failure", kind=type(err).__name__
                        )
                        failure.__cause__ = err
                        _LOGGER.error("Numerical failure at sweep value %s: %s", value, err)
                        return SweepResult(index=index, value=value, error=failure)
                    return SweepResult(index=index, value=value, result=result)

            results = await asyncio.gather(
                *(
                    _run_point(index, value, argument)
                    for index, (value, argument) in enumerate(points)
                )
            )

        failed = sum(1 for result in results if not result.ok)
        if failed:
            _LOGGER.warning("%d of %d sweep points failed", failed, len(results))
        return list(results)

    def run(
        self, points: Sequence[Tuple[Any, P]], job: Callable[[P], T]
    ) -> List[SweepResult[T]]:
        return asyncio.run(self.async_run(points, job))
