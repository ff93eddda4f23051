/**
 * WebSocket session with the headfit service.
 *
 * Lifecycle: connect -> hello -> ready -> streaming. A fatal Err or an
 * unexpected close tears the session down; reconnect (when enabled) dials
 * again and re-sends a fresh hello, because the server forgets everything
 * between connections.
 *
 * State replies are applied latest-wins: the render loop polls
 * `latestState()` once per drawn frame instead of reacting to every message,
 * so a burst of replies never queues up redraws.
 */

import {
  type ClientMsg,
  type ErrMsg,
  type HelloMsg,
  type ServerMsg,
  type StateMsg,
  decodeServer,
  encode,
} from "./protocol";

/** The part of WebSocket the session uses; tests substitute a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus =
  | "idle"
  | "connecting"
  | "awaiting-ready"
  | "streaming"
  | "closed";

export interface SessionEvents {
  onStatus?: (status: ConnectionStatus) => void;
  onReady?: (sessionId: string) => void;
  onState?: (state: StateMsg) => void;
  onErr?: (err: ErrMsg) => void;
  /** Bad server payloads and socket-level failures. */
  onProblem?: (message: string) => void;
}

export interface SessionOptions {
  url: string;
  hello: HelloMsg;
  events?: SessionEvents;
  socketFactory?: SocketFactory;
  /** Reconnect delay in ms; 0 disables auto-reconnect. */
  reconnectDelayMs?: number;
}

export class SessionConnection {
  private socket: SocketLike | null = null;
  private status: ConnectionStatus = "idle";
  private hello: HelloMsg;
  private readonly url: string;
  private readonly events: SessionEvents;
  private readonly factory: SocketFactory;
  private readonly reconnectDelayMs: number;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closedByUs = false;
  private lastState: StateMsg | null = null;
  private lastConsumedSeq = -1;
  private seq = 0;

  constructor(opts: SessionOptions) {
    this.url = opts.url;
    this.hello = opts.hello;
    this.events = opts.events ?? {};
    this.factory =
      opts.socketFactory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    this.reconnectDelayMs = opts.reconnectDelayMs ?? 1000;
  }

  connect(): void {
    this.closedByUs = false;
    this.dial();
  }

  private dial(): void {
    this.setStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(encode(this.hello));
      this.setStatus("awaiting-ready");
    };
    socket.onmessage = (ev) => this.handleMessage(ev.data);
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {
      this.events.onProblem?.("socket error");
    };
  }

  private handleMessage(data: string): void {
    let msg: ServerMsg;
    try {
      msg = decodeServer(data);
    } catch (e) {
      this.events.onProblem?.((e as Error).message);
      return;
    }
    if (msg.type === "ready") {
      this.setStatus("streaming");
      this.events.onReady?.(msg.session_id);
    } else if (msg.type === "state") {
      this.lastState = msg; // latest-wins
      this.events.onState?.(msg);
    } else {
      this.events.onErr?.(msg);
      // fatal errs are followed by a server-side close; nothing to do here
    }
  }

  private handleClose(): void {
    this.socket = null;
    if (this.closedByUs) {
      this.setStatus("closed");
      return;
    }
    this.setStatus("closed");
    if (this.reconnectDelayMs > 0) {
      this.reconnectTimer = setTimeout(() => {
        this.reconnectTimer = null;
        this.dial();
      }, this.reconnectDelayMs);
    }
  }

  private setStatus(status: ConnectionStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.events.onStatus?.(status);
    }
  }

  getStatus(): ConnectionStatus {
    return this.status;
  }

  /** Newest unseen State, or null; consuming marks it seen. */
  latestState(): StateMsg | null {
    if (this.lastState === null || this.lastState.seq === this.lastConsumedSeq) {
      return null;
    }
    this.lastConsumedSeq = this.lastState.seq;
    return this.lastState;
  }

  nextSeq(): number {
    return this.seq++;
  }

  sendRaw(msg: ClientMsg): boolean {
    if (this.status !== "streaming" || this.socket === null) return false;
    this.socket.send(encode(msg));
    return true;
  }

  /**
   * Switch cameras / model: replaces the handshake and re-hellos in place.
   * The server re-initializes the session and answers with a new ready.
   */
  rehello(hello: HelloMsg): boolean {
    this.hello = hello;
    this.seq = 0;
    this.lastState = null;
    this.lastConsumedSeq = -1;
    if (this.socket === null) return false;
    this.socket.send(encode(hello));
    this.setStatus("awaiting-ready");
    return true;
  }

  close(): void {
    this.closedByUs = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
    this.setStatus("closed");
  }
}
