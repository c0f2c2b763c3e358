"""Broker-agnostic job message contract.

The pipeline only assumes AMQP-style at-least-once semantics: publish,
poll, ack, nack-with-requeue. The in-process implementation backs tests
and single-node runs; AmqpBroker adapts the same contract to a real
AMQP server for distributed deployments.
"""

from __future__ import annotations

import itertools
import json
import threading
from collections import deque
from dataclasses import dataclass, asdict

JOB_KINDS = ("ingest", "track", "feature", "index")


@dataclass(frozen=True)
class JobMessage:
    """One unit of pipeline work, idempotent under redelivery via job_id."""

    job_id: str
    kind: str
    camera_id: str
    inputs: tuple[tuple[str, str], ...] = ()
    attempt: int = 0

    def __post_init__(self) -> None:
        if self.kind not in JOB_KINDS:
            raise ValueError(f"unknown job kind {self.kind!r}; expected one of {JOB_KINDS}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, body: str) -> "JobMessage":
        doc = json.loads(body)
        return cls(
            job_id=doc["job_id"],
            kind=doc["kind"],
            camera_id=doc["camera_id"],
            inputs=tuple(tuple(p) for p in doc.get("inputs", [])),
            attempt=int(doc.get("attempt", 0)),
        )


@dataclass(frozen=True)
class Delivery:
    tag: int
    message: JobMessage


class Broker:
    """Interface the pipeline codes against."""

    def publish(self, message: JobMessage) -> None:
        raise NotImplementedError

    def poll(self) -> Delivery | None:
        raise NotImplementedError

    def ack(self, delivery: Delivery) -> None:
        raise NotImplementedError

    def nack(self, delivery: Delivery) -> None:
        raise NotImplementedError


class InProcessBroker(Broker):
    """Thread-safe in-memory queue with explicit at-least-once mechanics.

    Messages stay in the unacked set until acknowledged; redeliver_unacked
    simulates a consumer crash. duplicate_deliveries delivers every
    published message twice, the pathological at-least-once case the
    workers must tolerate.
    """

    def __init__(self, max_attempts: int = 3, duplicate_deliveries: bool = False) -> None:
        self.max_attempts = max_attempts
        self.duplicate_deliveries = duplicate_deliveries
        self._lock = threading.Lock()
        self._pending: deque[JobMessage] = deque()
        self._unacked: dict[int, JobMessage] = {}
        self._dead: list[JobMessage] = []
        self._tags = itertools.count(1)

    def publish(self, message: JobMessage) -> None:
        with self._lock:
            self._pending.append(message)
            if self.duplicate_deliveries:
                self._pending.append(message)

    def poll(self) -> Delivery | None:
        with self._lock:
            if not self._pending:
                return None
            message = self._pending.popleft()
            tag = next(self._tags)
            self._unacked[tag] = message
            return Delivery(tag=tag, message=message)

    def ack(self, delivery: Delivery) -> None:
        with self._lock:
            self._unacked.pop(delivery.tag, None)

    def nack(self, delivery: Delivery) -> None:
        """Requeue with attempt+1, dead-lettering after max_attempts."""
        with self._lock:
            message = self._unacked.pop(delivery.tag, delivery.message)
            retried = JobMessage(
                job_id=message.job_id,
                kind=message.kind,
                camera_id=message.camera_id,
                inputs=message.inputs,
                attempt=message.attempt + 1,
            )
            if retried.attempt >= self.max_attempts:
                self._dead.append(retried)
            else:
                self._pending.append(retried)

    def redeliver_unacked(self) -> int:
        """Crash recovery: push everything un-acked back onto the queue."""
        with self._lock:
            count = len(self._unacked)
            for message in self._unacked.values():
                self._pending.append(message)
            self._unacked.clear()
            return count

    @property
    def dead_letters(self) -> list[JobMessage]:
        with self._lock:
            return list(self._dead)

    def idle(self) -> bool:
        with self._lock:
            return not self._pending and not self._unacked


class AmqpBroker(Broker):
    """Adapter onto an AMQP server (RabbitMQ et al.) via pika.

    Deployment-only; requires the 'amqp' extra. Queue is durable and
    consumed with explicit acks so the at-least-once contract matches
    InProcessBroker.
    """

    def __init__(self, uri: str, queue: str = "mtmc-jobs", max_attempts: int = 3) -> None:
        try:
            import pika
        except ImportError as exc:  # pragma: no cover - deployment path
            raise RuntimeError(
                "AmqpBroker requires the pika package (install the 'amqp' extra)"
            ) from exc
        self.max_attempts = max_attempts
        self._queue = queue
        self._connection = pika.BlockingConnection(pika.URLParameters(uri))
        self._channel = self._connection.channel()
        self._channel.queue_declare(queue=queue, durable=True)

    def publish(self, message: JobMessage) -> None:  # pragma: no cover
        self._channel.basic_publish(
            exchange="", routing_key=self._queue, body=message.to_json().encode()
        )

    def poll(self) -> Delivery | None:  # pragma: no cover
        method, _, body = self._channel.basic_get(self._queue)
        if method is None:
            return None
        return Delivery(tag=method.delivery_tag, message=JobMessage.from_json(body.decode()))

    def ack(self, delivery: Delivery) -> None:  # pragma: no cover
        self._channel.basic_ack(delivery.tag)

    def nack(self, delivery: Delivery) -> None:  # pragma: no cover
        message = delivery.message
        if message.attempt + 1 >= self.max_attempts:
            self._channel.basic_ack(delivery.tag)  # drop to dead-letter policy
            return
        self._channel.basic_ack(delivery.tag)
        self.publish(
            JobMessage(
                job_id=message.job_id,
                kind=message.kind,
                camera_id=message.camera_id,
                inputs=message.inputs,
                attempt=message.attempt + 1,
            )
        )

    def close(self) -> None:  # pragma: no cover
        self._connection.close()


def make_broker(uri: str, max_attempts: int = 3) -> Broker:
    """inprocess:// or amqp://... per the service configuration."""
    if uri.startswith("inprocess"):
        return InProcessBroker(max_attempts=max_attempts)
    if uri.startswith("amqp"):
        return AmqpBroker(uri, max_attempts=max_attempts)
    raise ValueError(f"unsupported broker uri {uri!r}")


__all__ = [
    "AmqpBroker",
    "Broker",
    "Delivery",
    "InProcessBroker",
    "JOB_KINDS",
    "JobMessage",
    "make_broker",
]
